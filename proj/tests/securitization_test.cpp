#include "doctest.h"

#include "mbsdao/securitization.hpp"
#include "mbsdao/rng.hpp"
#include "checks.hpp"

#include <algorithm>
#include <numeric>

using namespace mbsdao;

namespace {

constexpr std::int64_t month = 2'628'000;

std::vector<Tranche> three_stack(Money senior, Money mezz, Money junior, Rate coupon = {}) {
    return {
        {"senior", 0, senior, senior, coupon, 0},
        {"mezz", 1, mezz, mezz, coupon, 0},
        {"junior", 2, junior, junior, coupon, 0},
    };
}

// Independent statement of sequential subtraction: walk the stack in the
// stated direction, taking min(outstanding, remaining) at each rung.
std::vector<Money> sequential_takedown(std::vector<Money> outstanding, Money amount,
                                       bool senior_first) {
    std::vector<Money> taken(outstanding.size(), 0);
    if (!senior_first) std::reverse(outstanding.begin(), outstanding.end());
    for (std::size_t i = 0; i < outstanding.size() && amount > 0; ++i) {
        Money x = std::min(outstanding[i], amount);
        taken[i] = x;
        amount -= x;
    }
    if (!senior_first) std::reverse(taken.begin(), taken.end());
    return taken;
}

} // namespace

TEST_CASE("IO/PO split is interest versus everything principal-like") {
    PoolCollections c{50'000, 9'955, 0, 0};
    auto [io, po] = split_io_po(c);
    CHECK(io == 50'000); // 500.00
    CHECK(po == 9'955);  // 99.55
    CHECK(io + po == c.total());

    SUBCASE("prepayments and recoveries are principal") {
        PoolCollections spike{1'200, 9'955, 5'000'000, 250'000};
        auto [io2, po2] = split_io_po(spike);
        CHECK(io2 == 1'200);
        CHECK(po2 == 9'955 + 5'000'000 + 250'000);
    }
    SUBCASE("zero collections split to zero") {
        auto [io3, po3] = split_io_po(PoolCollections{});
        CHECK(io3 == 0);
        CHECK(po3 == 0);
    }
}

TEST_CASE("pass-through distribution is exact pro-rata with largest remainder") {
    SUBCASE("a quarter of the shares earns a quarter of the cash") {
        std::vector<std::int64_t> holdings{25, 75};
        auto out = distribute_passthrough(1'000'000, holdings);
        CHECK(out == std::vector<Money>{250'000, 750'000});
    }
    SUBCASE("a single holder receives everything") {
        std::vector<std::int64_t> holdings{17};
        CHECK(distribute_passthrough(999, holdings) == std::vector<Money>{999});
    }
    SUBCASE("100 units over three equal holders pay 34/33/33") {
        std::vector<std::int64_t> holdings{1, 1, 1};
        CHECK(distribute_passthrough(100, holdings) == std::vector<Money>{34, 33, 33});
    }
}

TEST_CASE("pass-through proportionality") {
    for (std::uint64_t round = 0; round < 100; ++round) {
        std::vector<std::int64_t> holdings;
        std::size_t n = 2 + round % 6;
        for (std::size_t i = 0; i < n; ++i)
            holdings.push_back(uniform_int(mix_draw(11, round, i, 0), 1, 1'000));
        Money total = uniform_int(mix_draw(11, round, 99, 1), 0, 10'000'000);
        Money k = uniform_int(mix_draw(11, round, 99, 2), 2, 9);

        auto base = distribute_passthrough(total, holdings);
        auto scaled = distribute_passthrough(k * total, holdings);
        CHECK(std::accumulate(base.begin(), base.end(), Money{0}) == total);
        CHECK(std::accumulate(scaled.begin(), scaled.end(), Money{0}) == k * total);
        // Scaling collections scales each payout, up to sub-unit rounding.
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::llabs(scaled[i] - k * base[i]) <= k);

        // Shuffling the holders shuffles the payouts with them (weights made
        // distinct so rounding has no ties to break).
        std::vector<std::int64_t> distinct = holdings;
        for (std::size_t i = 0; i < n; ++i) distinct[i] = distinct[i] * 1'000 + i;
        auto before = distribute_passthrough(total, distinct);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i)
            std::swap(perm[i - 1],
                      perm[uniform_int(mix_draw(11, round, i, 3), 0, static_cast<std::int64_t>(i) - 1)]);
        std::vector<std::int64_t> permuted(n);
        for (std::size_t i = 0; i < n; ++i) permuted[i] = distinct[perm[i]];
        auto after = distribute_passthrough(total, permuted);
        for (std::size_t i = 0; i < n; ++i) CHECK(after[i] == before[perm[i]]);
    }
}

TEST_CASE("losses write down junior-first") {
    SUBCASE("worked example: 100k junior absorbs, mezzanine takes the rest") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        auto wd = allocate_losses(tranches, 15'000'000);
        CHECK(wd == std::vector<Money>{0, 5'000'000, 10'000'000});
        CHECK(tranches[0].outstanding == 70'000'000);
        CHECK(tranches[1].outstanding == 15'000'000);
        CHECK(tranches[2].outstanding == 0);
    }
    SUBCASE("zero loss changes nothing") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        auto wd = allocate_losses(tranches, 0);
        CHECK(std::accumulate(wd.begin(), wd.end(), Money{0}) == 0);
        CHECK(tranches[0].outstanding == 70'000'000);
    }
    SUBCASE("loss beyond the stack zeroes everything and reports the excess") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        auto wd = allocate_losses(tranches, 150'000'000);
        CHECK(std::accumulate(wd.begin(), wd.end(), Money{0}) == 100'000'000);
        for (const auto& t : tranches) CHECK(t.outstanding == 0);
    }
}

TEST_CASE("seniority holds over random loss sequences") {
    for (std::uint64_t round = 0; round < 1'000; ++round) {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        int hits = 1 + static_cast<int>(mix_draw(13, round, 0, 0) % 8);
        for (int h = 0; h < hits; ++h) {
            Money loss = uniform_int(mix_draw(13, round, h, 1), 0, 30'000'000);
            Money senior_before = tranches[0].outstanding;
            auto wd = allocate_losses(tranches, loss);
            // Senior absorbs only once both lower rungs are gone.
            if (wd[0] > 0) {
                CHECK(tranches[1].outstanding == 0);
                CHECK(tranches[2].outstanding == 0);
            }
            if (wd[1] > 0) CHECK(tranches[2].outstanding == 0);
            CHECK(tranches[0].outstanding <= senior_before); // writedowns only shrink
            CHECK(std::accumulate(wd.begin(), wd.end(), Money{0}) <= loss);

            // The same hit against the independent junior-first walk.
            std::vector<Money> outs{senior_before, tranches[1].outstanding + wd[1],
                                    tranches[2].outstanding + wd[2]};
            CHECK(sequential_takedown(outs, loss, false) == wd);
        }
    }
}

TEST_CASE("waterfall principal retires tranches senior-first") {
    PoolCollections c;
    SUBCASE("small principal only touches the senior tranche") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        c.scheduled_principal = 5'000'000; // 50,000.00
        auto rows = distribute_waterfall(c, tranches);
        CHECK(rows[0].principal_paid == 5'000'000);
        CHECK(tranches[0].outstanding == 65'000'000);
        CHECK(tranches[1].outstanding == 20'000'000);
        CHECK(tranches[2].outstanding == 10'000'000);
    }
    SUBCASE("principal beyond the senior face spills to the mezzanine") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        c.scheduled_principal = 75'000'000;
        auto rows = distribute_waterfall(c, tranches);
        CHECK(rows[0].principal_paid == 70'000'000);
        CHECK(rows[1].principal_paid == 5'000'000);
        CHECK(rows[2].principal_paid == 0);
        CHECK(tranches[0].outstanding == 0);
        CHECK(tranches[1].outstanding == 15'000'000);
    }
    SUBCASE("zero collections leave every outstanding unchanged") {
        auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
        auto rows = distribute_waterfall(PoolCollections{}, tranches);
        for (const auto& r : rows) {
            CHECK(r.interest_paid == 0);
            CHECK(r.principal_paid == 0);
        }
        CHECK(tranches[0].outstanding == 70'000'000);
    }
    SUBCASE("random principal agrees with the senior-first walk") {
        for (std::uint64_t round = 0; round < 200; ++round) {
            auto tranches = three_stack(70'000'000, 20'000'000, 10'000'000);
            PoolCollections rc;
            rc.scheduled_principal = uniform_int(mix_draw(17, round, 0, 0), 0, 60'000'000);
            rc.prepaid_principal = uniform_int(mix_draw(17, round, 0, 1), 0, 30'000'000);
            rc.recoveries = uniform_int(mix_draw(17, round, 0, 2), 0, 20'000'000);
            std::vector<Money> outs{70'000'000, 20'000'000, 10'000'000};
            auto expect = sequential_takedown(outs, rc.principal_total(), true);
            auto rows = distribute_waterfall(rc, tranches);
            Money spill = rc.principal_total() -
                          std::accumulate(expect.begin(), expect.end(), Money{0});
            CHECK(rows[0].principal_paid == expect[0]);
            CHECK(rows[1].principal_paid == expect[1]);
            CHECK(rows[2].principal_paid == expect[2] + spill);
        }
    }
}

TEST_CASE("waterfall interest pays coupons by priority with residual to the junior") {
    Rate coupon = Rate::from_double(0.0575);
    SUBCASE("exact coupon cover on a fresh stack") {
        auto tranches = three_stack(20'000'000, 7'000'000, 3'000'000, coupon);
        PoolCollections c;
        c.interest = 143'750; // (6% - 0.25%) on 300k for one month
        auto rows = distribute_waterfall(c, tranches);
        CHECK(rows[0].interest_paid == 95'833);
        CHECK(rows[1].interest_paid == 33'542);
        CHECK(rows[2].interest_paid == 14'375);
    }
    SUBCASE("shortfall starves the junior rungs first") {
        auto tranches = three_stack(20'000'000, 7'000'000, 3'000'000, coupon);
        PoolCollections c;
        c.interest = 100'000;
        auto rows = distribute_waterfall(c, tranches);
        CHECK(rows[0].interest_paid == 95'833); // senior made whole
        CHECK(rows[1].interest_paid == 4'167);  // partial
        CHECK(rows[2].interest_paid == 0);
    }
    SUBCASE("excess spread lands on the most junior tranche") {
        auto tranches = three_stack(20'000'000, 7'000'000, 3'000'000, coupon);
        PoolCollections c;
        c.interest = 200'000;
        auto rows = distribute_waterfall(c, tranches);
        CHECK(rows[0].interest_paid == 95'833);
        CHECK(rows[1].interest_paid == 33'542);
        CHECK(rows[2].interest_paid == 14'375 + (200'000 - 143'750));
    }
}

TEST_CASE("waterfall cash out equals collections in, for any inputs") {
    for (std::uint64_t round = 0; round < 300; ++round) {
        Money f0 = uniform_int(mix_draw(19, round, 0, 0), 0, 50'000'000);
        Money f1 = uniform_int(mix_draw(19, round, 0, 1), 0, 20'000'000);
        Money f2 = uniform_int(mix_draw(19, round, 0, 2), 1, 10'000'000);
        std::vector<Tranche> tranches{
            {"a", 0, f0, f0, Rate::from_nano(uniform_int(mix_draw(19, round, 0, 3), 0, 100'000'000)), 0},
            {"b", 1, f1, f1, Rate::from_nano(uniform_int(mix_draw(19, round, 0, 4), 0, 100'000'000)), 0},
            {"c", 2, f2, f2, Rate::from_nano(uniform_int(mix_draw(19, round, 0, 5), 0, 100'000'000)), 0},
        };
        PoolCollections c;
        c.interest = uniform_int(mix_draw(19, round, 1, 0), 0, 1'000'000);
        c.scheduled_principal = uniform_int(mix_draw(19, round, 1, 1), 0, 40'000'000);
        c.prepaid_principal = uniform_int(mix_draw(19, round, 1, 2), 0, 40'000'000);
        c.recoveries = uniform_int(mix_draw(19, round, 1, 3), 0, 10'000'000);

        auto rows = distribute_waterfall(c, tranches);
        Money out = 0;
        for (const auto& r : rows) out += r.interest_paid + r.principal_paid;
        CHECK(out == c.total());
    }
}

// ---------------------------------------------------------------------------
// Pool lifecycle against the ledger

namespace {

struct PoolFixture {
    Ledger ledger;
    TitleRegistry registry;
    AccountId borrower;
    AccountId issuer;
    MortgageBook book;
    Securitizer sec;
    std::vector<std::uint64_t> loans;

    PoolFixture()
        : registry(ledger),
          borrower(ledger.create_account()),
          issuer(ledger.create_account()),
          book(ledger),
          sec(ledger) {
        ledger.fund(issuer, 100'000'000);
        ledger.fund(borrower, 100'000'000);
    }

    std::uint64_t add_loan(const std::string& parcel, Money principal, double rate) {
        PropertyRecord rec;
        rec.parcel_id = parcel;
        rec.legal_description = "lot " + parcel;
        rec.terrain = {20, 30, 50};
        rec.content_hash = "h-" + parcel;
        Serial title = registry.mint_title(ledger, rec, borrower).token.serial;
        AnnuityTerms t;
        t.principal = principal;
        t.nominal_rate = Rate::from_double(rate);
        t.n_periods = 360;
        t.periods_per_year = 12;
        std::uint64_t id = book.originate(ledger, registry, borrower, issuer, title, t,
                                          std::nullopt, principal + principal / 10);
        loans.push_back(id);
        return id;
    }

    std::uint64_t standard_pool() {
        add_loan("S-1", 10'000'000, 0.06);
        add_loan("S-2", 10'000'000, 0.06);
        add_loan("S-3", 10'000'000, 0.06);
        return sec.form_pool(ledger, book, issuer, loans);
    }

    // Full scheduled payments across the pool for one month.
    void collect_month(std::uint64_t pool, int k) {
        for (std::uint64_t id : loans) {
            if (book.account(id).terminal()) continue;
            Money due = book.account(id).due_now();
            sec.record(pool, book.collect(ledger, registry, id, due, k * month));
        }
    }
};

} // namespace

TEST_CASE("pool formation takes custody and sums principal") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();
    const Pool& p = f.sec.pool(pool);

    CHECK(p.initial_principal == 30'000'000); // three loans of 100,000.00
    CHECK(p.members.size() == 3);
    for (std::uint64_t id : f.loans)
        CHECK(f.ledger.owner_of(f.book.account(id).cashflow_token) == p.account);

    SUBCASE("pooling the same token twice is rejected") {
        CHECK_ERR(f.sec.form_pool(f.ledger, f.book, f.issuer, {f.loans[0]}),
                  Err::AlreadyPooled);
    }
    SUBCASE("an empty pool is rejected") {
        CHECK_ERR(f.sec.form_pool(f.ledger, f.book, f.issuer, {}), Err::EmptyPool);
    }
    SUBCASE("the pool owner must hold the cash-flow tokens") {
        std::uint64_t other = f.add_loan("S-4", 5'000'000, 0.07);
        AccountId stranger = f.ledger.create_account();
        CHECK_ERR(f.sec.form_pool(f.ledger, f.book, stranger, {other}), Err::NotOwner);
    }
    SUBCASE("a fractionalized cash-flow claim cannot be pooled") {
        std::uint64_t other = f.add_loan("S-5", 5'000'000, 0.07);
        AccountId a = f.ledger.create_account();
        f.book.fractionalize_cashflow(f.ledger, other, f.issuer, 10, {{a, 10}});
        CHECK_ERR(f.sec.form_pool(f.ledger, f.book, f.issuer, {other}), Err::NotOwner);
    }
}

TEST_CASE("weighted-average coupon and the default tranche coupon") {
    PoolFixture f;
    f.add_loan("W-1", 10'000'000, 0.06);
    f.add_loan("W-2", 10'000'000, 0.08);
    std::uint64_t pool = f.sec.form_pool(f.ledger, f.book, f.issuer, f.loans);
    CHECK(f.sec.wac(pool).nano == 70'000'000); // 7%

    auto classes = f.sec.issue_waterfall(f.ledger, pool,
                                         {{"senior", 15'000'000, {}}, {"junior", 5'000'000, {}}});
    CHECK(classes.size() == 2);
    CHECK(f.sec.pool(pool).tranches[0].coupon.nano == 67'500'000); // WAC minus 0.25% strip
    CHECK(f.ledger.balance_of(f.issuer, classes[0]) == 15'000'000);
}

TEST_CASE("issuance guards") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();

    SUBCASE("waterfall faces must sum to the pool principal") {
        CHECK_ERR(f.sec.issue_waterfall(f.ledger, pool, {{"senior", 1'000'000, {}}}),
                  Err::ConfigInvalid);
    }
    SUBCASE("only one scheme per pool") {
        f.sec.issue_passthrough(f.ledger, pool, 100, {{f.issuer, 100}});
        CHECK_ERR(f.sec.issue_io_po(f.ledger, pool, 10, 10), Err::InvalidArgument);
    }
    SUBCASE("closing a period needs an issued scheme") {
        CHECK_ERR(f.sec.close_period(f.ledger, f.book, pool, month), Err::ConfigInvalid);
    }
}

TEST_CASE("pass-through pool pays holders and the servicer, draining the pool account") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();
    AccountId a = f.ledger.create_account();
    AccountId b = f.ledger.create_account();
    f.sec.issue_passthrough(f.ledger, pool, 100, {{a, 60}, {b, 40}});

    f.collect_month(pool, 1);
    auto close = f.sec.close_period(f.ledger, f.book, pool, month);

    // A 300,000.00 pool at 0.25%/yr strips 62.50 for the month, off interest.
    CHECK(close.servicing == 6'250);
    Money collected = 3 * 59'955; // three 100k loans pay 599.55 each
    CHECK(close.distributed == collected - 6'250);
    CHECK(f.ledger.stable_balance(f.sec.pool(pool).account) == 0);
    CHECK(f.ledger.stable_balance(f.sec.servicer_account()) == 6'250);
    CHECK(f.ledger.stable_balance(a) == 104'169); // 60% of 1,736.15
    CHECK(f.ledger.stable_balance(b) == 69'446);  // 40%
}

TEST_CASE("waterfall pool: first-period cash lands per the frozen schedule") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();
    f.sec.issue_waterfall(f.ledger, pool, {{"senior", 20'000'000, {}},
                                           {"mezz", 7'000'000, {}},
                                           {"junior", 3'000'000, {}}});

    f.collect_month(pool, 1);
    auto close = f.sec.close_period(f.ledger, f.book, pool, month);

    CHECK(close.servicing == 6'250);
    REQUIRE(close.tranche_cash.size() == 3);
    // Net interest 1,500.00 − 62.50 = 1,437.50 exactly covers the coupon dues
    // at 5.75% (the WAC minus the strip): 958.33 / 335.42 / 143.75.
    CHECK(close.tranche_cash[0].interest_paid == 95'833);
    CHECK(close.tranche_cash[1].interest_paid == 33'542);
    CHECK(close.tranche_cash[2].interest_paid == 14'375);
    CHECK(close.tranche_cash[0].principal_paid == 3 * 9'955);
    CHECK(close.tranche_cash[1].principal_paid == 0);
    CHECK(f.sec.pool(pool).tranches[0].outstanding == 20'000'000 - 3 * 9'955);
    CHECK(f.ledger.stable_balance(f.sec.pool(pool).account) == 0);

    const auto& report = f.sec.report(pool);
    REQUIRE(report.size() == 3);
    CHECK(report[0].tranche == "senior");
    CHECK(report[0].interest_paid == 95'833);
    CHECK(report[0].outstanding == 20'000'000 - 3 * 9'955);
}

TEST_CASE("a foreclosure loss is written down junior-first and reported") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();
    f.sec.issue_waterfall(f.ledger, pool, {{"senior", 20'000'000, {}},
                                           {"mezz", 7'000'000, {}},
                                           {"junior", 3'000'000, {}}});

    // Loan 1 never pays; loans 2 and 3 stay current.
    for (int k = 1; k <= 4; ++k) {
        for (std::size_t i = 0; i < f.loans.size(); ++i) {
            std::uint64_t id = f.loans[i];
            Money pay = (i == 0) ? 0 : f.book.account(id).due_now();
            f.sec.record(pool, f.book.collect(f.ledger, f.registry, id, pay, k * month));
            f.book.advance_delinquency(f.ledger, id, k * month);
        }
        f.sec.close_period(f.ledger, f.book, pool, k * month);
    }
    REQUIRE(f.book.account(f.loans[0]).delinquency == Delinquency::default_judgment);

    AccountId buyer = f.ledger.create_account();
    f.ledger.fund(buyer, 9'000'000);
    auto [loss, r] = f.book.foreclose(f.ledger, f.registry, f.loans[0], 9'000'000, buyer,
                                      5 * month);
    f.sec.record(pool, r);
    f.sec.record_loss(pool, loss);
    CHECK(loss == 10'000'000 + 4 * 50'000 - 9'000'000); // exposure minus sale price

    for (std::size_t i = 1; i < f.loans.size(); ++i)
        f.sec.record(pool, f.book.collect(f.ledger, f.registry, f.loans[i],
                                          f.book.account(f.loans[i]).due_now(), 5 * month));
    auto close = f.sec.close_period(f.ledger, f.book, pool, 5 * month);

    CHECK(close.tranche_cash[2].writedown == loss); // junior absorbs it all
    CHECK(close.tranche_cash[0].writedown == 0);
    CHECK(f.sec.pool(pool).cumulative_loss == loss);
    CHECK(f.sec.pool(pool).tranches[2].outstanding == 3'000'000 - loss);
    // Recovery cash (9,000,000) retires senior principal this period.
    CHECK(close.tranche_cash[0].principal_paid > 9'000'000);
    CHECK(f.ledger.stable_balance(f.sec.pool(pool).account) == 0);
}

TEST_CASE("IO plus PO equals the pass-through total on the same scenario") {
    auto run = [](SchemeKind kind, std::vector<Money>& per_period) -> Money {
        PoolFixture f;
        std::uint64_t pool = f.standard_pool();
        AccountId holder = f.ledger.create_account();
        if (kind == SchemeKind::passthrough)
            f.sec.issue_passthrough(f.ledger, pool, 10, {{holder, 10}});
        else
            f.sec.issue_io_po(f.ledger, pool, 10, 10);

        Money total = 0;
        for (int k = 1; k <= 24; ++k) {
            for (std::size_t i = 0; i < f.loans.size(); ++i) {
                std::uint64_t id = f.loans[i];
                // A deterministic mix: loan 0 misses every sixth month, loan 2
                // prepays 1,000.00 at month 12.
                Money due = f.book.account(id).due_now();
                Money pay = (i == 0 && k % 6 == 0) ? 0 : due;
                f.sec.record(pool, f.book.collect(f.ledger, f.registry, id, pay, k * month));
                f.book.advance_delinquency(f.ledger, id, k * month);
                if (i == 2 && k == 12)
                    f.sec.record(pool, f.book.prepay(f.ledger, f.registry, id, 100'000,
                                                     k * month + 600));
            }
            auto close = f.sec.close_period(f.ledger, f.book, pool, k * month);
            per_period.push_back(close.distributed);
            total += close.distributed;
        }
        return total;
    };

    std::vector<Money> pass_periods, iopo_periods;
    Money pass_total = run(SchemeKind::passthrough, pass_periods);
    Money iopo_total = run(SchemeKind::io_po, iopo_periods);
    CHECK(pass_total == iopo_total);
    CHECK(pass_periods == iopo_periods);
}

TEST_CASE("pool cash conservation holds period by period under mixed behavior") {
    PoolFixture f;
    std::uint64_t pool = f.standard_pool();
    AccountId a = f.ledger.create_account();
    AccountId b = f.ledger.create_account();
    f.sec.issue_passthrough(f.ledger, pool, 7, {{a, 3}, {b, 4}});

    Money servicer_total = 0, distributed_total = 0, inflow_total = 0;
    for (int k = 1; k <= 36; ++k) {
        for (std::uint64_t id : f.loans) {
            if (f.book.account(id).terminal()) continue;
            double u = uniform_draw(23, 0, static_cast<std::uint64_t>(k * 10 + id), 0);
            Money due = f.book.account(id).due_now();
            Money pay = u < 0.2 ? 0 : due;
            CollectionResult r = f.book.collect(f.ledger, f.registry, id, pay, k * month);
            f.sec.record(pool, r);
            inflow_total += r.total();
            f.book.advance_delinquency(f.ledger, id, k * month);
            if (f.book.account(id).delinquency == Delinquency::default_judgment) {
                Money exposure = f.book.account(id).exposure();
                AccountId buyer = f.ledger.create_account();
                f.ledger.fund(buyer, exposure);
                auto [loss, fr] = f.book.foreclose(f.ledger, f.registry, id,
                                                   exposure * 8 / 10, buyer, k * month);
                f.sec.record(pool, fr);
                f.sec.record_loss(pool, loss);
                inflow_total += fr.total();
            }
        }
        auto close = f.sec.close_period(f.ledger, f.book, pool, k * month);
        servicer_total += close.servicing;
        distributed_total += close.distributed;
        CHECK(f.ledger.stable_balance(f.sec.pool(pool).account) == 0);
    }
    CHECK(inflow_total == distributed_total + servicer_total);
    CHECK(f.ledger.stable_balance(f.sec.servicer_account()) == servicer_total);
    CHECK(f.ledger.stable_balance(a) + f.ledger.stable_balance(b) == distributed_total);
}
