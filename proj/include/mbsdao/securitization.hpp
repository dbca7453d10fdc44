#pragma once

// Pooling of mortgage cash-flow tokens and security issuance on top of them:
// proportional pass-through shares, a sequential-pay waterfall with
// seniority-ordered loss writedowns, and IO/PO strips. The distribution
// kernels are pure functions; the Securitizer wires them to ledger cash.

#include "mbsdao/mortgage.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mbsdao {

struct PoolCollections {
    Money interest = 0;
    Money scheduled_principal = 0;
    Money prepaid_principal = 0;
    Money recoveries = 0;

    Money principal_total() const {
        return scheduled_principal + prepaid_principal + recoveries;
    }
    Money total() const { return interest + principal_total(); }
    PoolCollections& operator+=(const PoolCollections& o);
};

PoolCollections to_pool_collections(const CollectionResult& r);

struct Tranche {
    std::string name;
    int priority = 0; // 0 = most senior
    Money face = 0;
    Money outstanding = 0;
    Rate coupon; // annual
    ClassId token_class = 0;
};

struct TrancheCash {
    Money interest_paid = 0;
    Money principal_paid = 0;
    Money writedown = 0;
    Money outstanding_after = 0;
};

// ---------------------------------------------------------------------------
// Pure distribution kernels

// Splits `total` across holders in proportion to `holdings`: floor shares
// first, leftover minor units by largest remainder (ties to the lowest
// index). The result sums to `total` exactly.
std::vector<Money> distribute_passthrough(Money total, std::span<const std::int64_t> holdings);

// One period of the sequential-pay waterfall. Interest is paid senior-first
// at each tranche's coupon on its outstanding balance; whatever interest is
// left over goes to the most junior tranche as residual. Principal retires
// outstandings senior-first. Mutates `tranches`; the returned rows align
// with the input order and sum to the collections exactly.
std::vector<TrancheCash> distribute_waterfall(const PoolCollections& collections,
                                              std::vector<Tranche>& tranches,
                                              int periods_per_year = 12);

// Writes `loss` down against outstandings junior-first (highest priority
// number first). Returns per-tranche writedowns aligned with the input
// order; their sum is min(loss, total outstanding).
std::vector<Money> allocate_losses(std::vector<Tranche>& tranches, Money loss);

// (interest, principal) where principal counts scheduled, prepaid, and
// recovered amounts alike.
std::pair<Money, Money> split_io_po(const PoolCollections& collections);

// ---------------------------------------------------------------------------
// Pools and issuance

enum class SchemeKind { none, passthrough, waterfall, io_po };

struct TrancheSpec {
    std::string name;
    Money face = 0;
    std::optional<Rate> coupon; // default: pool WAC minus the servicing strip
};

struct TrancheReportRow {
    int period = 0;
    std::string tranche;
    Money interest_paid = 0;
    Money principal_paid = 0;
    Money writedown = 0;
    Money outstanding = 0;
};

struct Pool {
    std::uint64_t id = 0;
    AccountId owner = 0;   // the securitizer that formed the pool
    AccountId account = 0; // contract account holding tokens and cash in transit
    std::vector<std::uint64_t> members; // mortgage ids
    Money initial_principal = 0;
    Money balance = 0; // member principal at the start of the open period
    PoolCollections current;
    Money cumulative_loss = 0;
    int periods_closed = 0;

    SchemeKind scheme = SchemeKind::none;
    ClassId share_class = 0; // passthrough
    Money n_shares = 0;
    std::vector<Tranche> tranches; // waterfall
    std::vector<Money> writedowns_this_period;
    ClassId io_class = 0; // io_po
    ClassId po_class = 0;
};

class Securitizer {
public:
    // `servicing_strip` is an annual rate taken off collected interest each
    // period, capped by the interest actually collected.
    Securitizer(Ledger& ledger, Rate servicing_strip = Rate::from_nano(2'500'000));

    // Moves the mortgages' cash-flow tokens from `owner` into a new pool
    // contract account, so subsequent collections accumulate there.
    std::uint64_t form_pool(Ledger& ledger, const MortgageBook& book, AccountId owner,
                            const std::vector<std::uint64_t>& mortgage_ids);

    // Pass-through shares over the whole pool; allocation must sum to
    // n_shares.
    ClassId issue_passthrough(Ledger& ledger, std::uint64_t pool, Money n_shares,
                              const std::vector<ShareAllocation>& allocation);

    // Sequential-pay tranches; faces must sum to the pool's initial
    // principal and one token unit represents one minor unit of face. All
    // tranche tokens are minted to the pool owner.
    std::vector<ClassId> issue_waterfall(Ledger& ledger, std::uint64_t pool,
                                         const std::vector<TrancheSpec>& specs);

    // Interest-only / principal-only strip pair, each with its own share
    // supply minted to the pool owner.
    std::pair<ClassId, ClassId> issue_io_po(Ledger& ledger, std::uint64_t pool,
                                            Money io_shares, Money po_shares);

    // Accumulates one mortgage event's cash breakdown into the open period.
    void record(std::uint64_t pool, const CollectionResult& r);

    // Realized principal loss (foreclosure shortfall beyond the guarantee).
    // Waterfall pools write it down junior-first immediately.
    void record_loss(std::uint64_t pool, Money loss);

    struct PeriodClose {
        int period = 0;
        Money servicing = 0;
        Money distributed = 0; // cash paid to security holders
        PoolCollections collections; // net of servicing
        std::vector<TrancheCash> tranche_cash; // waterfall pools
        Money io = 0, po = 0;                  // io_po pools
    };

    // Takes the servicing strip, distributes the rest per the issued scheme,
    // resets the open period, and refreshes the pool balance from the book.
    PeriodClose close_period(Ledger& ledger, const MortgageBook& book, std::uint64_t pool,
                             std::int64_t t);

    const Pool& pool(std::uint64_t id) const;
    std::vector<std::uint64_t> pool_ids() const;
    AccountId servicer_account() const { return servicer_; }
    Rate servicing_strip() const { return strip_; }
    // Principal-weighted average coupon across members at pool formation.
    Rate wac(std::uint64_t pool) const;
    const std::vector<TrancheReportRow>& report(std::uint64_t pool) const;

private:
    Pool& pool_mut(std::uint64_t id);
    // Pays `amount` out of the pool account pro-rata to holders of `cls`.
    Money pay_class(Ledger& ledger, const Pool& p, ClassId cls, Money amount);

    Rate strip_;
    AccountId servicer_ = 0;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, Pool> pools_;
    std::map<std::uint64_t, Rate> wac_;
    std::map<std::uint64_t, std::vector<TrancheReportRow>> reports_;
    std::set<TokenRef> pooled_;
};

} // namespace mbsdao
