#include "mbsdao/ledger.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>

namespace mbsdao {

using json = nlohmann::ordered_json;

std::string account_hex(AccountId id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%06llx", static_cast<unsigned long long>(id));
    return buf;
}

std::optional<AccountId> parse_account_hex(const std::string& s) {
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return std::nullopt;
    AccountId value = 0;
    for (std::size_t i = 2; i < s.size(); ++i) {
        char c = s[i];
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = 10 + (c - 'a');
        else if (c >= 'A' && c <= 'F') digit = 10 + (c - 'A');
        else return std::nullopt;
        value = value * 16 + static_cast<AccountId>(digit);
    }
    return value;
}

const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::mint: return "mint";
    case EventKind::transfer: return "transfer";
    case EventKind::sale: return "sale";
    case EventKind::intra_wallet: return "intra_wallet";
    case EventKind::burn: return "burn";
    case EventKind::status: return "status";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(const std::string& s) {
    for (EventKind k : {EventKind::mint, EventKind::transfer, EventKind::sale,
                        EventKind::intra_wallet, EventKind::burn, EventKind::status}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

Ledger::Ledger(std::int64_t block_interval) : block_interval_(block_interval) {
    require(block_interval > 0, Err::ConfigInvalid, "block interval must be positive");
    classes_.push_back(TokenClass{stable_class, "stable", TokenKind::fungible,
                                  std::nullopt, Rate{}, std::nullopt, 0});
    supply_[stable_class];
}

AccountId Ledger::create_account() { return next_account_++; }

bool Ledger::account_exists(AccountId a) const { return a >= 1 && a < next_account_; }

void Ledger::require_account(AccountId a) const {
    require(account_exists(a), Err::UnknownAccount, "unknown account " + account_hex(a));
}

void Ledger::link_accounts(AccountId a, AccountId b) {
    require_account(a);
    require_account(b);
    AccountId ra = group_root(a), rb = group_root(b);
    if (ra != rb) owner_group_[std::max(ra, rb)] = std::min(ra, rb);
}

AccountId Ledger::group_root(AccountId a) const {
    auto it = owner_group_.find(a);
    while (it != owner_group_.end()) {
        a = it->second;
        it = owner_group_.find(a);
    }
    return a;
}

bool Ledger::same_owner(AccountId a, AccountId b) const {
    return a == b || group_root(a) == group_root(b);
}

ClassId Ledger::register_class(std::string name, TokenKind kind, std::optional<Money> max_supply,
                               Rate royalty, std::optional<AccountId> royalty_recipient,
                               std::int64_t voting_weight) {
    require(royalty.nano >= 0 && royalty.nano <= Rate::scale, Err::ConfigInvalid,
            "royalty rate out of [0,1]");
    require(!max_supply || *max_supply > 0, Err::ConfigInvalid, "max supply must be positive");
    if (royalty_recipient) require_account(*royalty_recipient);
    ClassId id = static_cast<ClassId>(classes_.size());
    classes_.push_back(TokenClass{id, std::move(name), kind, max_supply, royalty,
                                  royalty_recipient, voting_weight});
    supply_[id];
    return id;
}

const TokenClass& Ledger::require_class(ClassId cls) const {
    require(cls < classes_.size(), Err::UnknownClass, "unknown token class");
    return classes_[cls];
}

const TokenClass& Ledger::token_class(ClassId cls) const { return require_class(cls); }

void Ledger::fund(AccountId account, Money amount) {
    require_account(account);
    require(amount > 0, Err::InvalidArgument, "funding amount must be positive");
    balances_[stable_class][account] += amount;
    supply_[stable_class].minted += amount;
    append_event(EventKind::mint, stable_class, std::nullopt, amount, 0, account,
                 std::nullopt, 0);
}

void Ledger::pay(AccountId from, AccountId to, Money amount) {
    transfer_fungible(stable_class, from, to, amount, std::nullopt);
}

TokenRef Ledger::mint_nft(ClassId cls, AccountId to, std::string metadata) {
    const TokenClass& tc = require_class(cls);
    require(tc.kind == TokenKind::non_fungible, Err::InvalidArgument,
            "class is not non-fungible");
    require_account(to);
    ClassSupply& sup = supply_[cls];
    require(!tc.max_supply || sup.minted < *tc.max_supply, Err::SupplyExceeded,
            "class " + tc.name + " is fully minted");
    Serial serial = sup.next_serial++;
    sup.minted += 1;
    NftRecord& rec = nfts_[cls][serial];
    rec.owner = to;
    rec.minted_to = to;
    rec.metadata = std::move(metadata);
    append_event(EventKind::mint, cls, serial, std::nullopt, 0, to, std::nullopt, 0);
    return TokenRef{cls, serial};
}

void Ledger::mint_fungible(ClassId cls, AccountId to, Money amount) {
    const TokenClass& tc = require_class(cls);
    require(tc.kind == TokenKind::fungible, Err::InvalidArgument, "class is not fungible");
    require(cls != stable_class, Err::InvalidArgument, "stable units are minted via fund()");
    require_account(to);
    require(amount > 0, Err::InvalidArgument, "mint amount must be positive");
    ClassSupply& sup = supply_[cls];
    require(!tc.max_supply || sup.minted + amount <= *tc.max_supply, Err::SupplyExceeded,
            "mint would exceed max supply of " + tc.name);
    sup.minted += amount;
    balances_[cls][to] += amount;
    primary_allowance_[cls][to] += amount;
    append_event(EventKind::mint, cls, std::nullopt, amount, 0, to, std::nullopt, 0);
}

Ledger::NftRecord& Ledger::require_nft(TokenRef token) {
    require_class(token.cls);
    auto ci = nfts_.find(token.cls);
    require(ci != nfts_.end(), Err::UnknownToken, "unknown token");
    auto ti = ci->second.find(token.serial);
    require(ti != ci->second.end(), Err::UnknownToken, "unknown token serial");
    return ti->second;
}

const Ledger::NftRecord& Ledger::require_nft(TokenRef token) const {
    return const_cast<Ledger*>(this)->require_nft(token);
}

Money Ledger::settle_sale(const TokenClass& cls, AccountId seller, AccountId buyer, Money price,
                          bool primary) {
    require(price >= 0, Err::InvalidArgument, "price must be non-negative");
    Money royalty = 0;
    if (!primary && cls.royalty.nano > 0 && cls.royalty_recipient) {
        royalty = fraction_of(price, cls.royalty);
    }
    Money buyer_balance = balance_of(buyer, stable_class);
    require(buyer_balance >= price, Err::InsufficientFunds,
            "buyer " + account_hex(buyer) + " cannot cover price");
    balances_[stable_class][buyer] -= price;
    balances_[stable_class][seller] += price - royalty;
    if (royalty > 0) {
        balances_[stable_class][*cls.royalty_recipient] += royalty;
        if (royalty_hook_) royalty_hook_(cls.id, *cls.royalty_recipient, royalty);
    }
    return royalty;
}

TransferEvent Ledger::transfer_nft(TokenRef token, AccountId from, AccountId to,
                                   std::optional<Money> price) {
    require_account(from);
    require_account(to);
    NftRecord& rec = require_nft(token);
    require(rec.owner == from, Err::NotOwner,
            account_hex(from) + " does not own the token");
    require(!rec.lock, Err::TokenLocked, "token is transfer-locked");
    const TokenClass& tc = classes_[token.cls];

    bool intra = same_owner(from, to);
    bool primary = !rec.left_minter && from == rec.minted_to;
    Money royalty = 0;
    EventKind kind = EventKind::transfer;
    if (price) {
        if (intra) {
            // The cash still moves, but the event is not a sale.
            royalty = settle_sale(tc, from, to, *price, true);
            kind = EventKind::intra_wallet;
        } else {
            royalty = settle_sale(tc, from, to, *price, primary);
            kind = EventKind::sale;
        }
    } else if (intra && from != to) {
        kind = EventKind::intra_wallet;
    }
    rec.owner = to;
    if (!intra) rec.left_minter = true;
    return append_event(kind, token.cls, token.serial, std::nullopt, from, to, price, royalty);
}

TransferEvent Ledger::transfer_fungible(ClassId cls, AccountId from, AccountId to, Money amount,
                                        std::optional<Money> price) {
    const TokenClass& tc = require_class(cls);
    require(tc.kind == TokenKind::fungible, Err::InvalidArgument, "class is not fungible");
    require_account(from);
    require_account(to);
    require(amount > 0, Err::InvalidArgument, "transfer amount must be positive");
    Money bal = balance_of(from, cls);
    require(bal >= amount, Err::NotOwner,
            account_hex(from) + " holds " + format_money(bal) + " < " + format_money(amount));
    require(!price || cls != stable_class, Err::InvalidArgument,
            "stable units cannot themselves be priced");

    Money& allowance = primary_allowance_[cls][from];
    bool primary = allowance >= amount;
    bool intra = same_owner(from, to);
    Money royalty = 0;
    EventKind kind = EventKind::transfer;
    if (price) {
        royalty = settle_sale(tc, from, to, *price, primary || intra);
        kind = intra ? EventKind::intra_wallet : EventKind::sale;
    } else if (intra && from != to) {
        kind = EventKind::intra_wallet;
    }
    allowance -= std::min(allowance, amount);
    balances_[cls][from] -= amount;
    balances_[cls][to] += amount;
    return append_event(kind, cls, std::nullopt, amount, from, to, price, royalty);
}

void Ledger::burn_fungible(ClassId cls, AccountId from, Money amount) {
    const TokenClass& tc = require_class(cls);
    require(tc.kind == TokenKind::fungible, Err::InvalidArgument, "class is not fungible");
    require_account(from);
    require(amount > 0, Err::InvalidArgument, "burn amount must be positive");
    Money bal = balance_of(from, cls);
    require(bal >= amount, Err::NotOwner,
            account_hex(from) + " holds " + format_money(bal) + " < " + format_money(amount));
    balances_[cls][from] -= amount;
    supply_[cls].burned += amount;
    Money& allowance = primary_allowance_[cls][from];
    allowance -= std::min(allowance, amount);
    append_event(EventKind::burn, cls, std::nullopt, amount, from, 0, std::nullopt, 0);
}

AccountId Ledger::owner_of(TokenRef token) const { return require_nft(token).owner; }

Money Ledger::balance_of(AccountId account, ClassId cls) const {
    auto ci = balances_.find(cls);
    if (ci == balances_.end()) return 0;
    auto ai = ci->second.find(account);
    return ai == ci->second.end() ? 0 : ai->second;
}

Money Ledger::minted(ClassId cls) const {
    auto it = supply_.find(cls);
    return it == supply_.end() ? 0 : it->second.minted;
}

Money Ledger::burned(ClassId cls) const {
    auto it = supply_.find(cls);
    return it == supply_.end() ? 0 : it->second.burned;
}

const std::string& Ledger::nft_metadata(TokenRef token) const {
    return require_nft(token).metadata;
}

AccountId Ledger::nft_minted_to(TokenRef token) const { return require_nft(token).minted_to; }

std::vector<TransferEvent> Ledger::events(const EventFilter& filter) const {
    std::vector<TransferEvent> out;
    for (const TransferEvent& e : events_) {
        if (filter.cls && e.cls != *filter.cls) continue;
        if (filter.kind && e.kind != *filter.kind) continue;
        if (filter.account && e.from != *filter.account && e.to != *filter.account) continue;
        out.push_back(e);
    }
    return out;
}

std::vector<std::pair<TokenRef, AccountId>> Ledger::nft_owners() const {
    std::vector<std::pair<TokenRef, AccountId>> out;
    for (const auto& [cls, table] : nfts_)
        for (const auto& [serial, rec] : table)
            out.emplace_back(TokenRef{cls, serial}, rec.owner);
    return out;
}

void Ledger::lock_token(TokenRef token, AccountId locker) {
    require_account(locker);
    NftRecord& rec = require_nft(token);
    require(!rec.lock, Err::TokenLocked, "token is already locked");
    rec.lock = locker;
}

void Ledger::unlock_token(TokenRef token, AccountId locker) {
    NftRecord& rec = require_nft(token);
    require(rec.lock.has_value(), Err::InvalidArgument, "token is not locked");
    require(*rec.lock == locker, Err::NotLienholder, "only the locker may release the token");
    rec.lock.reset();
}

bool Ledger::is_locked(TokenRef token) const { return require_nft(token).lock.has_value(); }

TransferEvent Ledger::log_status(ClassId cls, Serial subject, AccountId contract, Money code) {
    require_class(cls);
    require_account(contract);
    return append_event(EventKind::status, cls, subject, code, contract, contract,
                        std::nullopt, 0);
}

void Ledger::advance_time(std::int64_t to) {
    require(to >= now_, Err::EventOutOfOrder, "clock cannot move backwards");
    now_ = to;
}

std::int64_t Ledger::next_block_time() const {
    return (now_ + block_interval_ - 1) / block_interval_ * block_interval_;
}

void Ledger::set_royalty_hook(std::function<void(ClassId, AccountId, Money)> hook) {
    royalty_hook_ = std::move(hook);
}

TransferEvent& Ledger::append_event(EventKind kind, ClassId cls, std::optional<Serial> serial,
                                    std::optional<Money> amount, AccountId from, AccountId to,
                                    std::optional<Money> price, Money royalty) {
    TransferEvent e;
    e.seq = next_seq_++;
    e.block_time = next_block_time();
    e.kind = kind;
    e.cls = cls;
    e.serial = serial;
    e.amount = amount;
    e.from = from;
    e.to = to;
    e.price = price;
    e.royalty = royalty;
    events_.push_back(e);
    return events_.back();
}

// ---------------------------------------------------------------------------
// persistence

namespace {

json event_to_json(const TransferEvent& e) {
    json j;
    j["seq"] = e.seq;
    j["block_time"] = e.block_time;
    j["kind"] = to_string(e.kind);
    j["class"] = e.cls;
    if (e.serial) j["serial"] = *e.serial;
    if (e.amount) j["amount"] = *e.amount;
    j["from"] = account_hex(e.from);
    j["to"] = account_hex(e.to);
    if (e.price) j["price"] = *e.price;
    if (e.royalty != 0) j["royalty"] = e.royalty;
    return j;
}

TransferEvent event_from_json(const json& j) {
    TransferEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.block_time = j.at("block_time").get<std::int64_t>();
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    require(kind.has_value(), Err::InvalidArgument, "unknown event kind");
    e.kind = *kind;
    e.cls = j.at("class").get<ClassId>();
    if (j.contains("serial")) e.serial = j["serial"].get<Serial>();
    if (j.contains("amount")) e.amount = j["amount"].get<Money>();
    auto from = parse_account_hex(j.at("from").get<std::string>());
    auto to = parse_account_hex(j.at("to").get<std::string>());
    require(from && to, Err::InvalidArgument, "bad account in event");
    e.from = *from;
    e.to = *to;
    if (j.contains("price")) e.price = j["price"].get<Money>();
    if (j.contains("royalty")) e.royalty = j["royalty"].get<Money>();
    return e;
}

} // namespace

std::string event_to_json_text(const TransferEvent& e) { return event_to_json(e).dump(); }

TransferEvent event_from_json_text(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    require(!j.is_discarded() && j.is_object(), Err::InvalidArgument, "malformed event json");
    return event_from_json(j);
}

std::string Ledger::snapshot_json() const {
    json j;
    j["block_interval"] = block_interval_;
    j["now"] = now_;
    j["next_account"] = next_account_;
    j["next_seq"] = next_seq_;

    json classes = json::array();
    for (const TokenClass& tc : classes_) {
        json c;
        c["id"] = tc.id;
        c["name"] = tc.name;
        c["kind"] = tc.kind == TokenKind::fungible ? "fungible" : "non_fungible";
        if (tc.max_supply) c["max_supply"] = *tc.max_supply;
        c["royalty_nano"] = tc.royalty.nano;
        if (tc.royalty_recipient) c["royalty_recipient"] = account_hex(*tc.royalty_recipient);
        c["voting_weight"] = tc.voting_weight;
        classes.push_back(std::move(c));
    }
    j["classes"] = std::move(classes);

    json supply = json::object();
    for (const auto& [cls, sup] : supply_) {
        json s;
        s["minted"] = sup.minted;
        s["burned"] = sup.burned;
        s["next_serial"] = sup.next_serial;
        supply[std::to_string(cls)] = std::move(s);
    }
    j["supply"] = std::move(supply);

    json balances = json::object();
    for (const auto& [cls, per_account] : balances_) {
        json b = json::object();
        for (const auto& [account, amount] : per_account)
            if (amount != 0) b[account_hex(account)] = amount;
        balances[std::to_string(cls)] = std::move(b);
    }
    j["balances"] = std::move(balances);

    json allowances = json::object();
    for (const auto& [cls, per_account] : primary_allowance_) {
        json b = json::object();
        for (const auto& [account, amount] : per_account)
            if (amount != 0) b[account_hex(account)] = amount;
        if (!b.empty()) allowances[std::to_string(cls)] = std::move(b);
    }
    j["primary_allowance"] = std::move(allowances);

    json nfts = json::object();
    for (const auto& [cls, table] : nfts_) {
        json t = json::object();
        for (const auto& [serial, rec] : table) {
            json r;
            r["owner"] = account_hex(rec.owner);
            r["minted_to"] = account_hex(rec.minted_to);
            r["left_minter"] = rec.left_minter;
            if (rec.lock) r["lock"] = account_hex(*rec.lock);
            if (!rec.metadata.empty()) r["metadata"] = rec.metadata;
            t[std::to_string(serial)] = std::move(r);
        }
        nfts[std::to_string(cls)] = std::move(t);
    }
    j["nfts"] = std::move(nfts);

    json links = json::object();
    for (const auto& [child, parent] : owner_group_)
        links[account_hex(child)] = account_hex(parent);
    j["owner_links"] = std::move(links);

    json events = json::array();
    for (const TransferEvent& e : events_) events.push_back(event_to_json(e));
    j["events"] = std::move(events);

    return j.dump(2) + "\n";
}

Ledger Ledger::from_snapshot_json(const std::string& text) {
    json j = json::parse(text);
    Ledger l(j.at("block_interval").get<std::int64_t>());
    l.now_ = j.at("now").get<std::int64_t>();
    l.next_account_ = j.at("next_account").get<AccountId>();
    l.next_seq_ = j.at("next_seq").get<std::uint64_t>();

    l.classes_.clear();
    for (const json& c : j.at("classes")) {
        TokenClass tc;
        tc.id = c.at("id").get<ClassId>();
        tc.name = c.at("name").get<std::string>();
        tc.kind = c.at("kind").get<std::string>() == "fungible" ? TokenKind::fungible
                                                                : TokenKind::non_fungible;
        if (c.contains("max_supply")) tc.max_supply = c["max_supply"].get<Money>();
        tc.royalty = Rate::from_nano(c.at("royalty_nano").get<std::int64_t>());
        if (c.contains("royalty_recipient")) {
            auto a = parse_account_hex(c["royalty_recipient"].get<std::string>());
            require(a.has_value(), Err::InvalidArgument, "bad royalty recipient");
            tc.royalty_recipient = *a;
        }
        tc.voting_weight = c.at("voting_weight").get<std::int64_t>();
        require(tc.id == l.classes_.size(), Err::InvalidArgument, "class ids must be dense");
        l.classes_.push_back(std::move(tc));
    }

    l.supply_.clear();
    for (const auto& [key, s] : j.at("supply").items()) {
        ClassSupply sup;
        sup.minted = s.at("minted").get<Money>();
        sup.burned = s.at("burned").get<Money>();
        sup.next_serial = s.at("next_serial").get<Serial>();
        l.supply_[static_cast<ClassId>(std::stoul(key))] = sup;
    }

    auto load_per_account = [](const json& src) {
        std::map<ClassId, std::map<AccountId, Money>> out;
        for (const auto& [key, table] : src.items()) {
            auto cls = static_cast<ClassId>(std::stoul(key));
            for (const auto& [acct, amount] : table.items()) {
                auto a = parse_account_hex(acct);
                require(a.has_value(), Err::InvalidArgument, "bad account key");
                out[cls][*a] = amount.get<Money>();
            }
        }
        return out;
    };
    l.balances_ = load_per_account(j.at("balances"));
    l.primary_allowance_ = load_per_account(j.at("primary_allowance"));

    l.nfts_.clear();
    for (const auto& [clskey, table] : j.at("nfts").items()) {
        auto cls = static_cast<ClassId>(std::stoul(clskey));
        for (const auto& [serialkey, r] : table.items()) {
            NftRecord rec;
            auto owner = parse_account_hex(r.at("owner").get<std::string>());
            auto minted_to = parse_account_hex(r.at("minted_to").get<std::string>());
            require(owner && minted_to, Err::InvalidArgument, "bad nft account");
            rec.owner = *owner;
            rec.minted_to = *minted_to;
            rec.left_minter = r.at("left_minter").get<bool>();
            if (r.contains("lock")) {
                auto lock = parse_account_hex(r["lock"].get<std::string>());
                require(lock.has_value(), Err::InvalidArgument, "bad lock account");
                rec.lock = *lock;
            }
            if (r.contains("metadata")) rec.metadata = r["metadata"].get<std::string>();
            l.nfts_[cls][static_cast<Serial>(std::stoull(serialkey))] = std::move(rec);
        }
    }

    l.owner_group_.clear();
    for (const auto& [child, parent] : j.at("owner_links").items()) {
        auto c = parse_account_hex(child);
        auto p = parse_account_hex(parent.get<std::string>());
        require(c && p, Err::InvalidArgument, "bad owner link");
        l.owner_group_[*c] = *p;
    }

    l.events_.clear();
    for (const json& e : j.at("events")) l.events_.push_back(event_from_json(e));
    return l;
}

} // namespace mbsdao
