#include "mbsdao/tokenization.hpp"

#include "json.hpp"

namespace mbsdao {

using json = nlohmann::ordered_json;

const char* to_string(Elevation e) {
    switch (e) {
    case Elevation::upper: return "upper";
    case Elevation::mid: return "mid";
    case Elevation::lower: return "lower";
    }
    return "?";
}

std::optional<Elevation> elevation_from_string(const std::string& s) {
    for (Elevation e : {Elevation::upper, Elevation::mid, Elevation::lower})
        if (s == to_string(e)) return e;
    return std::nullopt;
}

std::string property_to_json_text(const PropertyRecord& r) {
    json j;
    j["parcel_id"] = r.parcel_id;
    j["street_address"] = r.street_address;
    j["legal_description"] = r.legal_description;
    j["land_area_acres"] = r.land_area_acres;
    j["region"] = r.region;
    j["elevation"] = to_string(r.elevation);
    j["slope"] = r.slope;
    j["terrain_weights"] = {{"gravel", r.terrain.gravel},
                            {"rock", r.terrain.rock},
                            {"vegetation", r.terrain.vegetation}};
    j["content_hash"] = r.content_hash;
    j["disclaimer"] = r.disclaimer;
    return j.dump(2) + "\n";
}

PropertyRecord property_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(Err::InvalidArgument, std::string("property JSON: ") + e.what());
    }
    PropertyRecord r;
    try {
        r.parcel_id = j.at("parcel_id").get<std::string>();
        r.street_address = j.value("street_address", "");
        r.legal_description = j.value("legal_description", "");
        r.land_area_acres = j.value("land_area_acres", 0.0);
        r.region = j.value("region", "");
        auto elev = elevation_from_string(j.value("elevation", "mid"));
        require(elev.has_value(), Err::InvalidArgument, "unknown elevation");
        r.elevation = *elev;
        r.slope = j.value("slope", "");
        if (j.contains("terrain_weights")) {
            const json& t = j["terrain_weights"];
            r.terrain.gravel = t.value("gravel", 0);
            r.terrain.rock = t.value("rock", 0);
            r.terrain.vegetation = t.value("vegetation", 0);
        }
        r.content_hash = j.value("content_hash", "");
        if (j.contains("disclaimer")) r.disclaimer = j["disclaimer"].get<std::string>();
    } catch (const json::exception& e) {
        fail(Err::InvalidArgument, std::string("property JSON: ") + e.what());
    }
    return r;
}

std::vector<std::pair<std::string, bool>> validate_property(const PropertyRecord& r) {
    return {
        {"parcel_id present", !r.parcel_id.empty()},
        {"terrain weights sum to 100", r.terrain.sum() == 100},
        {"terrain weights non-negative",
         r.terrain.gravel >= 0 && r.terrain.rock >= 0 && r.terrain.vegetation >= 0},
        {"land area non-negative", r.land_area_acres >= 0},
        {"content hash present", !r.content_hash.empty()},
        {"disclaimer present", !r.disclaimer.empty()},
    };
}

TitleRegistry::TitleRegistry(Ledger& ledger) {
    title_class_ = ledger.register_class("property-title", TokenKind::non_fungible, std::nullopt);
    custody_account_ = ledger.create_account();
}

TitleToken& TitleRegistry::mint_title(Ledger& ledger, PropertyRecord record, AccountId owner) {
    require(record.terrain.sum() == 100 && record.terrain.gravel >= 0 &&
                record.terrain.rock >= 0 && record.terrain.vegetation >= 0,
            Err::WeightsInvalid, "terrain weights must be non-negative and sum to 100");
    require(!record.parcel_id.empty(), Err::InvalidArgument, "parcel id required");
    require(!by_parcel_.count(record.parcel_id), Err::DuplicateParcel,
            "parcel " + record.parcel_id + " already registered");
    TokenRef token = ledger.mint_nft(title_class_, owner, record.parcel_id);
    TitleToken& t = titles_[token.serial];
    t.token = token;
    t.property = std::move(record);
    by_parcel_[t.property.parcel_id] = token.serial;
    return t;
}

const TitleToken& TitleRegistry::title(Serial serial) const {
    auto it = titles_.find(serial);
    require(it != titles_.end(), Err::UnknownToken, "unknown title serial");
    return it->second;
}

TitleToken& TitleRegistry::title_mut(Serial serial) {
    return const_cast<TitleToken&>(title(serial));
}

const TitleToken* TitleRegistry::by_parcel(const std::string& parcel_id) const {
    auto it = by_parcel_.find(parcel_id);
    return it == by_parcel_.end() ? nullptr : &titles_.at(it->second);
}

ClassId TitleRegistry::fractionalize(Ledger& ledger, Serial title, AccountId caller,
                                     Money n_shares, const std::vector<ShareAllocation>& allocation) {
    TitleToken& t = title_mut(title);
    require(!t.lien, Err::Encumbered, "cannot fractionalize a liened title");
    require(ledger.owner_of(t.token) == caller, Err::NotOwner, "caller does not own the title");
    require(t.custody == Custody::self, Err::InvalidArgument, "title already in contract custody");
    require(n_shares > 0, Err::InvalidArgument, "share count must be positive");
    Money allocated = 0;
    for (const ShareAllocation& a : allocation) {
        require(a.shares > 0, Err::InvalidArgument, "share allocations must be positive");
        allocated += a.shares;
    }
    require(allocated == n_shares, Err::InvalidArgument, "allocation must sum to n_shares");

    ledger.transfer_nft(t.token, caller, custody_account_);
    ClassId share_class = ledger.register_class(
        "shares:" + t.property.parcel_id, TokenKind::fungible, n_shares);
    for (const ShareAllocation& a : allocation)
        ledger.mint_fungible(share_class, a.holder, a.shares);
    t.custody = Custody::contract;
    t.share_class = share_class;
    t.shares_outstanding = n_shares;
    return share_class;
}

TitleToken& TitleRegistry::redeem(Ledger& ledger, Serial title, AccountId redeemer) {
    TitleToken& t = title_mut(title);
    require(t.share_class != 0, Err::InvalidArgument, "title is not fractionalized");
    Money held = ledger.balance_of(redeemer, t.share_class);
    require(held == t.shares_outstanding, Err::NotOwner,
            "redemption requires 100% of shares; holder has " + format_money(held) + " of " +
                format_money(t.shares_outstanding));
    ledger.burn_fungible(t.share_class, redeemer, t.shares_outstanding);
    ledger.transfer_nft(t.token, custody_account_, redeemer);
    t.custody = Custody::self;
    t.share_class = 0;
    t.shares_outstanding = 0;
    return t;
}

LienRecord TitleRegistry::encumber(Ledger& ledger, Serial title, AccountId creditor) {
    TitleToken& t = title_mut(title);
    require(!t.lien, Err::AlreadyEncumbered, "title already has an active lien");
    ledger.lock_token(t.token, creditor);
    t.lien = LienRecord{creditor, ledger.next_block_time(), std::nullopt};
    return *t.lien;
}

TitleToken& TitleRegistry::release(Ledger& ledger, Serial title, AccountId caller) {
    TitleToken& t = title_mut(title);
    require(t.lien.has_value(), Err::InvalidArgument, "title has no active lien");
    require(t.lien->creditor == caller, Err::NotLienholder,
            "only the lienholder may release");
    ledger.unlock_token(t.token, caller);
    t.lien->released_at = std::max(ledger.next_block_time(), t.lien->recorded_at + 1);
    t.lien_history.push_back(*t.lien);
    t.lien.reset();
    return t;
}

void TitleRegistry::authorized_transfer(Ledger& ledger, Serial title, AccountId from,
                                        AccountId to, AccountId lienholder) {
    TitleToken& t = title_mut(title);
    require(t.lien.has_value(), Err::InvalidArgument, "title has no active lien");
    require(t.lien->creditor == lienholder, Err::NotLienholder,
            "consent must come from the lienholder");
    ledger.unlock_token(t.token, lienholder);
    ledger.transfer_nft(t.token, from, to);
    ledger.lock_token(t.token, lienholder);
}

void TitleRegistry::transfer_into_custody(Ledger& ledger, Serial title, AccountId from,
                                          AccountId custodian) {
    TitleToken& t = title_mut(title);
    require(!t.lien, Err::Encumbered, "cannot take custody of a liened title");
    require(t.custody == Custody::self, Err::InvalidArgument, "title already in custody");
    ledger.transfer_nft(t.token, from, custodian);
    t.custody = Custody::contract;
}

void TitleRegistry::return_from_custody(Ledger& ledger, Serial title, AccountId custodian,
                                        AccountId to) {
    TitleToken& t = title_mut(title);
    require(!t.lien, Err::Encumbered, "release the lien before returning custody");
    require(t.custody == Custody::contract, Err::InvalidArgument, "title is not in custody");
    ledger.transfer_nft(t.token, custodian, to);
    t.custody = Custody::self;
}

StatementOfAuthority& TitleRegistry::record_authority(Serial title, AccountId agent,
                                                      std::string authorizing_procedure) {
    const TitleToken& t = this->title(title);
    require(!authorizing_procedure.empty(), Err::InvalidArgument,
            "a statement of authority must cite its authorizing action, procedure or vote");
    authorities_.push_back(
        StatementOfAuthority{t.property.parcel_id, agent, std::move(authorizing_procedure)});
    return authorities_.back();
}

} // namespace mbsdao
