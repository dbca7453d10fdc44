#pragma once

// Property-title registry on top of the ledger: title NFTs carrying
// property metadata, fractionalization into fungible shares held against a
// custody account, lien encumbrance backed by ledger transfer locks, and
// statement-of-authority records for real-world transfer agents.

#include "mbsdao/ledger.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mbsdao {

enum class Elevation { upper, mid, lower };

const char* to_string(Elevation e);
std::optional<Elevation> elevation_from_string(const std::string& s);

struct TerrainWeights {
    int gravel = 0;
    int rock = 0;
    int vegetation = 0; // percent; the three must sum to exactly 100
    int sum() const { return gravel + rock + vegetation; }
    bool operator==(const TerrainWeights&) const = default;
};

struct PropertyRecord {
    std::string parcel_id;
    std::string street_address;
    std::string legal_description;
    double land_area_acres = 0;
    std::string region;
    Elevation elevation = Elevation::mid;
    std::string slope;
    TerrainWeights terrain;
    std::string content_hash; // hash of the off-ledger document bundle
    std::string disclaimer = "This NFT does not represent any land ownership.";
};

std::string property_to_json_text(const PropertyRecord& r);
PropertyRecord property_from_json_text(const std::string& text);

struct LienRecord {
    AccountId creditor = 0;
    std::int64_t recorded_at = 0;
    std::optional<std::int64_t> released_at;
};

enum class Custody { self, contract };

struct TitleToken {
    TokenRef token;
    PropertyRecord property;
    std::optional<LienRecord> lien; // the active lien, if any
    std::vector<LienRecord> lien_history;
    Custody custody = Custody::self;
    ClassId share_class = 0;  // nonzero while fractionalized
    Money shares_outstanding = 0;
};

struct ShareAllocation {
    AccountId holder = 0;
    Money shares = 0;
};

struct StatementOfAuthority {
    std::string parcel_id;
    AccountId agent = 0;
    std::string authorizing_procedure; // proposal id or vote record
};

class TitleRegistry {
public:
    explicit TitleRegistry(Ledger& ledger);

    // Mints a title NFT for the record's parcel. Rejects terrain weights
    // that do not sum to 100 and parcel ids already registered.
    TitleToken& mint_title(Ledger& ledger, PropertyRecord record, AccountId owner);

    // Moves the title into registry custody and issues `n_shares` fungible
    // shares per the allocation (amounts must sum to n_shares).
    ClassId fractionalize(Ledger& ledger, Serial title, AccountId caller, Money n_shares,
                          const std::vector<ShareAllocation>& allocation);

    // Burns a full set of shares and returns the title to the redeemer.
    TitleToken& redeem(Ledger& ledger, Serial title, AccountId redeemer);

    LienRecord encumber(Ledger& ledger, Serial title, AccountId creditor);
    TitleToken& release(Ledger& ledger, Serial title, AccountId caller);

    // Moves a liened title with the lienholder's consent; the lien survives
    // the transfer.
    void authorized_transfer(Ledger& ledger, Serial title, AccountId from, AccountId to,
                             AccountId lienholder);

    // Custody handoff for contract wrappers (mortgage escrow): plain
    // transfers that also flip the custody flag. The title must be
    // unencumbered at the moment of handoff.
    void transfer_into_custody(Ledger& ledger, Serial title, AccountId from, AccountId custodian);
    void return_from_custody(Ledger& ledger, Serial title, AccountId custodian, AccountId to);

    StatementOfAuthority& record_authority(Serial title, AccountId agent,
                                           std::string authorizing_procedure);

    const TitleToken& title(Serial serial) const;
    TitleToken& title_mut(Serial serial);
    const TitleToken* by_parcel(const std::string& parcel_id) const;
    const std::vector<StatementOfAuthority>& authorities() const { return authorities_; }
    ClassId title_class() const { return title_class_; }
    AccountId custody_account() const { return custody_account_; }
    std::size_t title_count() const { return titles_.size(); }

private:
    ClassId title_class_ = 0;
    AccountId custody_account_ = 0;
    std::map<Serial, TitleToken> titles_;
    std::map<std::string, Serial> by_parcel_;
    std::vector<StatementOfAuthority> authorities_;
};

// Validates a property record against the registry's invariants; returns a
// (check name, pass) list suitable for CLI reporting.
std::vector<std::pair<std::string, bool>> validate_property(const PropertyRecord& r);

} // namespace mbsdao
