#pragma once

// Deterministic single-chain ledger: accounts, fungible and non-fungible
// token classes, transfers with royalty enforcement, and a globally ordered
// event log stamped by a block clock.
//
// Concurrency model: single writer. All mutations go through one Ledger
// value on one thread; the whole state is copyable, so readers can take a
// snapshot by value and independent scenarios can run on isolated copies.

#include "mbsdao/errors.hpp"
#include "mbsdao/money.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mbsdao {

using AccountId = std::uint64_t; // 0 is reserved for "none" (mint source, burn sink)
using ClassId = std::uint32_t;
using Serial = std::uint64_t;

std::string account_hex(AccountId id);                 // 1 -> "0x000001"
std::optional<AccountId> parse_account_hex(const std::string& s);

enum class TokenKind { fungible, non_fungible };

struct TokenClass {
    ClassId id = 0;
    std::string name;
    TokenKind kind = TokenKind::fungible;
    std::optional<Money> max_supply;           // units (fungible) or count (NFT)
    Rate royalty;                              // fraction of secondary sale price
    std::optional<AccountId> royalty_recipient;
    std::int64_t voting_weight = 0;            // governance votes per unit
};

struct TokenRef {
    ClassId cls = 0;
    Serial serial = 0; // 0 for fungible refs
    auto operator<=>(const TokenRef&) const = default;
};

enum class EventKind { mint, transfer, sale, intra_wallet, burn, status };

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& s);

struct TransferEvent {
    std::uint64_t seq = 0;
    std::int64_t block_time = 0;
    EventKind kind = EventKind::transfer;
    ClassId cls = 0;
    std::optional<Serial> serial;  // NFTs; doubles as the subject id of status events
    std::optional<Money> amount;   // fungible units; doubles as the status code
    AccountId from = 0;
    AccountId to = 0;
    std::optional<Money> price;
    Money royalty = 0;
};

// One event as a single-line JSON object — the same encoding the ledger
// snapshot uses for its event log, and the line format of exported JSONL.
std::string event_to_json_text(const TransferEvent& e);
TransferEvent event_from_json_text(const std::string& line); // Err::InvalidArgument

struct EventFilter {
    std::optional<ClassId> cls;
    std::optional<AccountId> account; // matches either side
    std::optional<EventKind> kind;
};

class Ledger {
public:
    // Class 0 is the stable accounting unit every price settles in.
    static constexpr ClassId stable_class = 0;

    explicit Ledger(std::int64_t block_interval = 600);

    // -- accounts ------------------------------------------------------
    AccountId create_account();
    bool account_exists(AccountId a) const;
    std::uint64_t account_count() const { return next_account_ - 1; }

    // Flag two accounts as belonging to the same real-world owner; priced
    // moves between them are recorded as intra-wallet, not sales.
    void link_accounts(AccountId a, AccountId b);
    bool same_owner(AccountId a, AccountId b) const;

    // -- token classes -------------------------------------------------
    ClassId register_class(std::string name, TokenKind kind, std::optional<Money> max_supply,
                           Rate royalty = {}, std::optional<AccountId> royalty_recipient = {},
                           std::int64_t voting_weight = 0);
    const TokenClass& token_class(ClassId cls) const;
    std::size_t class_count() const { return classes_.size(); }

    // -- stable-unit helpers --------------------------------------------
    // Faucet-mints stable units; scenario drivers use it to model exogenous
    // cash (borrower income, market buyers, guarantors).
    void fund(AccountId account, Money amount);
    Money stable_balance(AccountId account) const { return balance_of(account, stable_class); }
    void pay(AccountId from, AccountId to, Money amount); // plain stable transfer

    // -- mint / transfer / burn -----------------------------------------
    TokenRef mint_nft(ClassId cls, AccountId to, std::string metadata = {});
    void mint_fungible(ClassId cls, AccountId to, Money amount);
    TransferEvent transfer_nft(TokenRef token, AccountId from, AccountId to,
                               std::optional<Money> price = {});
    TransferEvent transfer_fungible(ClassId cls, AccountId from, AccountId to, Money amount,
                                    std::optional<Money> price = {});
    void burn_fungible(ClassId cls, AccountId from, Money amount);

    // -- queries ---------------------------------------------------------
    AccountId owner_of(TokenRef token) const;
    Money balance_of(AccountId account, ClassId cls) const;
    Money minted(ClassId cls) const;
    Money burned(ClassId cls) const;
    Money circulating(ClassId cls) const { return minted(cls) - burned(cls); }
    const std::string& nft_metadata(TokenRef token) const;
    AccountId nft_minted_to(TokenRef token) const;
    std::vector<TransferEvent> events(const EventFilter& filter = {}) const;
    const std::vector<TransferEvent>& log() const { return events_; }
    const std::map<ClassId, std::map<AccountId, Money>>& fungible_balances() const {
        return balances_;
    }
    std::vector<std::pair<TokenRef, AccountId>> nft_owners() const;

    // -- transfer locks ---------------------------------------------------
    // A locked NFT cannot move until the same locker releases it; the title
    // registry uses this to enforce lien encumbrance at the ledger level.
    void lock_token(TokenRef token, AccountId locker);
    void unlock_token(TokenRef token, AccountId locker);
    bool is_locked(TokenRef token) const;

    // -- status markers ----------------------------------------------------
    // Non-cash contract events (delinquency transitions, default judgments)
    // recorded on-chain so investors see them within one block.
    TransferEvent log_status(ClassId cls, Serial subject, AccountId contract, Money code);

    // -- block clock -------------------------------------------------------
    void advance_time(std::int64_t to);
    std::int64_t now() const { return now_; }
    std::int64_t block_interval() const { return block_interval_; }
    std::int64_t next_block_time() const;

    // Called with (class, recipient, amount) whenever a royalty is credited.
    void set_royalty_hook(std::function<void(ClassId, AccountId, Money)> hook);

    // -- persistence --------------------------------------------------------
    std::string snapshot_json() const;
    static Ledger from_snapshot_json(const std::string& text);

private:
    struct NftRecord {
        AccountId owner = 0;
        AccountId minted_to = 0;
        bool left_minter = false;
        std::optional<AccountId> lock;
        std::string metadata;
    };
    struct ClassSupply {
        Money minted = 0;
        Money burned = 0;
        Serial next_serial = 1;
    };

    TransferEvent& append_event(EventKind kind, ClassId cls, std::optional<Serial> serial,
                                std::optional<Money> amount, AccountId from, AccountId to,
                                std::optional<Money> price, Money royalty);
    void require_account(AccountId a) const;
    const TokenClass& require_class(ClassId cls) const;
    NftRecord& require_nft(TokenRef token);
    const NftRecord& require_nft(TokenRef token) const;
    AccountId group_root(AccountId a) const;
    // Settles a priced transfer; returns the royalty paid.
    Money settle_sale(const TokenClass& cls, AccountId seller, AccountId buyer, Money price,
                      bool primary);

    std::int64_t block_interval_ = 600;
    std::int64_t now_ = 0;
    AccountId next_account_ = 1;
    std::uint64_t next_seq_ = 1;
    std::vector<TokenClass> classes_;
    std::map<ClassId, ClassSupply> supply_;
    std::map<ClassId, std::map<AccountId, Money>> balances_;
    // units minted to an account and not yet transferred out; sales covered
    // by this allowance are primary and royalty-exempt
    std::map<ClassId, std::map<AccountId, Money>> primary_allowance_;
    std::map<ClassId, std::map<Serial, NftRecord>> nfts_;
    std::map<AccountId, AccountId> owner_group_;
    std::vector<TransferEvent> events_;
    std::function<void(ClassId, AccountId, Money)> royalty_hook_;
};

} // namespace mbsdao
