#include "mbsdao/scenario.hpp"

#include "mbsdao/errors.hpp"
#include "mbsdao/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mbsdao {

namespace {

// Draw tags; the stream is the loan index and the counter the month.
constexpr std::uint64_t tag_prepay = 1;
constexpr std::uint64_t tag_default = 2;
constexpr std::uint64_t tag_jitter = 3;
constexpr std::uint64_t tag_principal = 10;
constexpr std::uint64_t tag_rate = 11;

} // namespace

double smm_from_cpr(double cpr_annual) {
    require(cpr_annual >= 0.0 && cpr_annual <= 1.0, Err::ConfigInvalid, "cpr out of [0,1]");
    return 1.0 - std::pow(1.0 - cpr_annual, 1.0 / 12.0);
}

double mdr_from_cdr(double cdr_annual) {
    require(cdr_annual >= 0.0 && cdr_annual <= 1.0, Err::ConfigInvalid, "cdr out of [0,1]");
    return 1.0 - std::pow(1.0 - cdr_annual, 1.0 / 12.0);
}

const char* to_string(ReportingMode m) {
    return m == ReportingMode::onchain ? "onchain" : "traditional";
}

void validate_config(const ScenarioConfig& cfg) {
    require(cfg.horizon_months >= 1, Err::ConfigInvalid, "horizon must be at least one month");
    require(cfg.n_loans >= 1, Err::ConfigInvalid, "need at least one loan");
    require(cfg.cpr_annual >= 0.0 && cfg.cpr_annual <= 1.0, Err::ConfigInvalid,
            "cpr out of [0,1]");
    require(cfg.cdr_annual >= 0.0 && cfg.cdr_annual <= 1.0, Err::ConfigInvalid,
            "cdr out of [0,1]");
    require(cfg.recovery_haircut >= 0.0 && cfg.recovery_haircut <= 1.0, Err::ConfigInvalid,
            "recovery haircut out of [0,1]");
    require(cfg.loans.principal_lo > 0 && cfg.loans.principal_lo <= cfg.loans.principal_hi,
            Err::ConfigInvalid, "principal range invalid");
    require(cfg.loans.rate_lo.nano >= 0 && cfg.loans.rate_lo.nano <= cfg.loans.rate_hi.nano,
            Err::ConfigInvalid, "rate range invalid");
    require(cfg.loans.n_periods >= 1, Err::ConfigInvalid, "term must be at least one period");
    require(cfg.traditional_lag_days >= 0, Err::ConfigInvalid, "lag days must be >= 0");
    require(cfg.scheme != SchemeKind::none, Err::ConfigInvalid, "pool needs an issuance scheme");
    if (cfg.scheme == SchemeKind::waterfall) {
        require(!cfg.tranche_fractions_ppm.empty(), Err::ConfigInvalid,
                "waterfall needs tranche fractions");
        for (std::int64_t f : cfg.tranche_fractions_ppm)
            require(f > 0, Err::ConfigInvalid, "tranche fractions must be positive");
    }
    for (Rate r : cfg.rate_path)
        require(r.nano >= 0, Err::ConfigInvalid, "rate path entries must be >= 0");
}

int DelinquencyCensus::total() const {
    int sum = 0;
    for (int n : by_state) sum += n;
    return sum;
}

Scenario::Scenario(ScenarioConfig config)
    : cfg_(std::move(config)),
      registry_(ledger_),
      book_(ledger_),
      sec_(ledger_) {
    validate_config(cfg_);
    smm_ = smm_from_cpr(cfg_.cpr_annual);
    mdr_ = mdr_from_cdr(cfg_.cdr_annual);
    sale_fraction_ = Rate::from_double(1.0 - cfg_.recovery_haircut);
    if (!cfg_.rate_path.empty()) {
        std::vector<std::pair<std::int64_t, Rate>> steps;
        for (std::size_t j = 0; j < cfg_.rate_path.size(); ++j)
            steps.emplace_back(static_cast<std::int64_t>(j) * seconds_per_year,
                               cfg_.rate_path[j]);
        rate_oracle_.emplace(std::move(steps));
    }
    originate_book();
    issue_pool();
}

void Scenario::originate_book() {
    issuer_ = ledger_.create_account();
    market_ = ledger_.create_account();
    borrowers_.reserve(static_cast<std::size_t>(cfg_.n_loans));
    loan_ids_.reserve(static_cast<std::size_t>(cfg_.n_loans));
    for (int i = 0; i < cfg_.n_loans; ++i) {
        const auto stream = static_cast<std::uint64_t>(i);
        Money principal = uniform_int(mix_draw(cfg_.seed, stream, 0, tag_principal),
                                      cfg_.loans.principal_lo, cfg_.loans.principal_hi);
        Rate rate = Rate::from_nano(uniform_int(mix_draw(cfg_.seed, stream, 0, tag_rate),
                                                cfg_.loans.rate_lo.nano,
                                                cfg_.loans.rate_hi.nano));

        AccountId borrower = ledger_.create_account();
        borrowers_.push_back(borrower);

        char parcel[32];
        std::snprintf(parcel, sizeof parcel, "SIM-%05d", i);
        PropertyRecord rec;
        rec.parcel_id = parcel;
        rec.street_address = std::string(parcel) + " Simulation Way";
        rec.legal_description = std::string("simulated lot ") + parcel;
        rec.land_area_acres = 1.0;
        rec.region = "synthetic";
        rec.elevation = Elevation::mid;
        rec.slope = "level";
        rec.terrain = {34, 33, 33};
        rec.content_hash = std::string("sim:") + parcel;
        Serial title = registry_.mint_title(ledger_, rec, borrower).token.serial;

        AnnuityTerms terms;
        terms.principal = principal;
        terms.nominal_rate = rate;
        terms.periods_per_year = 12;
        terms.n_periods = cfg_.loans.n_periods;
        terms.initial_exchange_date = 0;
        if (rate_oracle_) {
            terms.rate_kind = RateKind::adjustable;
            terms.reset_every = 12;
        }

        ledger_.fund(issuer_, principal);
        loan_ids_.push_back(book_.originate(ledger_, registry_, borrower, issuer_, title, terms,
                                            std::nullopt, principal));
    }
}

void Scenario::issue_pool() {
    pool_ = sec_.form_pool(ledger_, book_, issuer_, loan_ids_);
    switch (cfg_.scheme) {
    case SchemeKind::passthrough:
        sec_.issue_passthrough(ledger_, pool_, 1'000'000, {{issuer_, 1'000'000}});
        break;
    case SchemeKind::waterfall: {
        Money principal = sec_.pool(pool_).initial_principal;
        auto faces = allocate_largest_remainder(principal, cfg_.tranche_fractions_ppm);
        std::vector<TrancheSpec> specs;
        for (std::size_t k = 0; k < faces.size(); ++k) {
            require(faces[k] > 0, Err::ConfigInvalid, "tranche face rounded to zero");
            specs.push_back({"T" + std::to_string(k + 1), faces[k], {}});
        }
        sec_.issue_waterfall(ledger_, pool_, specs);
        break;
    }
    case SchemeKind::io_po:
        sec_.issue_io_po(ledger_, pool_, 1'000'000, 1'000'000);
        break;
    case SchemeKind::none:
        break; // unreachable; validate_config rejects it
    }
}

void Scenario::stamp_new_events(std::vector<EventStamp>& stamps, std::uint64_t& from_seq) const {
    const auto& log = ledger_.log();
    for (std::size_t i = from_seq; i < log.size(); ++i)
        stamps.push_back({log[i].seq, ledger_.now(), log[i].block_time});
    from_seq = log.size();
}

const std::vector<PeriodReport>& Scenario::run() {
    if (ran_) return reports_;
    ran_ = true;
    reports_.reserve(static_cast<std::size_t>(cfg_.horizon_months));

    auto seen = static_cast<std::uint64_t>(ledger_.log().size());
    for (int m = 1; m <= cfg_.horizon_months; ++m) {
        const std::int64_t due = static_cast<std::int64_t>(m) * seconds_per_month;
        PeriodReport rep;
        rep.month = m;
        PoolCollections gross;

        for (std::size_t idx = 0; idx < loan_ids_.size(); ++idx) {
            const std::uint64_t id = loan_ids_[idx];
            const MortgageAccount& acc = book_.account(id);
            if (acc.terminal()) continue;
            const auto stream = static_cast<std::uint64_t>(idx);
            const auto counter = static_cast<std::uint64_t>(m);
            // Events land mid-block, the way real activity does. Settling the
            // clock before the batch keeps every event of this loan (funding
            // included) on the timestamp its stamps record.
            const std::int64_t t =
                due + uniform_int(mix_draw(cfg_.seed, stream, counter, tag_jitter), 0,
                                  ledger_.block_interval() - 1);
            ledger_.advance_time(std::max(ledger_.now(), t));

            bool defaulted = defaulted_at_.count(id) != 0;
            if (!defaulted && mdr_ > 0 &&
                uniform_draw(cfg_.seed, stream, counter, tag_default) < mdr_) {
                defaulted_at_.emplace(id, m);
                defaulted = true;
            }

            CollectionResult r;
            if (defaulted) {
                r = book_.collect(ledger_, registry_, id, 0, t);
            } else {
                Money owed = acc.due_now();
                ledger_.fund(borrowers_[idx], owed);
                r = book_.collect(ledger_, registry_, id, owed, t);
                if (!acc.terminal() && acc.delinquency == Delinquency::current && smm_ > 0 &&
                    uniform_draw(cfg_.seed, stream, counter, tag_prepay) < smm_) {
                    Money payoff =
                        acc.state.notional_outstanding + acc.state.accrued_interest;
                    if (payoff > 0) {
                        ledger_.fund(borrowers_[idx], payoff);
                        r += book_.prepay(ledger_, registry_, id, payoff, t);
                    }
                }
                if (rate_oracle_ && !acc.terminal() &&
                    acc.terms.rate_kind == RateKind::adjustable && m % 12 == 0 &&
                    m < acc.terms.n_periods && acc.delinquency == Delinquency::current)
                    book_.reset_rate(ledger_, id, *rate_oracle_, due);
            }
            totals_.borrower_payments += r.total();
            sec_.record(pool_, r);
            gross += to_pool_collections(r);

            book_.advance_delinquency(ledger_, id, t);
            if (acc.delinquency == Delinquency::default_judgment) {
                Money sale = fraction_of(acc.collateral_value, sale_fraction_);
                ledger_.fund(market_, sale);
                auto [loss, rec] = book_.foreclose(ledger_, registry_, id, sale, market_, t);
                sec_.record(pool_, rec);
                sec_.record_loss(pool_, loss);
                gross += to_pool_collections(rec);
                totals_.recoveries += rec.recoveries - rec.guarantee;
                totals_.guarantee_payouts += rec.guarantee;
                rep.losses += loss;
            }
            stamp_new_events(rep.events, seen);
        }

        auto close = sec_.close_period(ledger_, book_, pool_,
                                       due + 2 * ledger_.block_interval());
        stamp_new_events(rep.events, seen);
        require(gross.total() == close.distributed + close.servicing, Err::InvariantViolated,
                "period cash did not fully distribute");

        rep.collections = gross;
        rep.servicing = close.servicing;
        rep.distributed = close.distributed;
        rep.tranche_cash = close.tranche_cash;
        rep.io = close.io;
        rep.po = close.po;
        for (std::uint64_t id : loan_ids_) ++rep.census[book_.account(id).delinquency];

        totals_.distributions += close.distributed;
        totals_.servicing += close.servicing;
        totals_.losses += rep.losses;
        reports_.push_back(std::move(rep));
    }

    for (std::uint64_t id : loan_ids_) {
        switch (book_.account(id).delinquency) {
        case Delinquency::matured: ++totals_.loans_matured; break;
        case Delinquency::prepaid: ++totals_.loans_prepaid; break;
        case Delinquency::foreclosed: ++totals_.loans_foreclosed; break;
        default: break;
        }
    }
    require(totals_.borrower_payments + totals_.guarantee_payouts + totals_.recoveries ==
                totals_.distributions + totals_.servicing,
            Err::InvariantViolated, "run-level cash conservation failed");
    return reports_;
}

// ---------------------------------------------------------------------------

LagStats reporting_lag_stats(const std::vector<PeriodReport>& reports, ReportingMode mode,
                             std::int64_t block_interval, std::int64_t lag_days) {
    LagStats s;
    s.mode = mode;
    s.bound = mode == ReportingMode::onchain ? block_interval : lag_days * 86'400;
    long double sum = 0;
    for (const PeriodReport& rep : reports) {
        for (const EventStamp& e : rep.events) {
            std::int64_t lag = mode == ReportingMode::onchain ? e.visible_at - e.occurred_at
                                                              : lag_days * 86'400;
            ++s.events;
            sum += static_cast<long double>(lag);
            s.max_lag = std::max(s.max_lag, lag);
            if (lag > s.bound) s.within_bound = false;
        }
    }
    if (s.events > 0) s.mean_lag = static_cast<double>(sum / s.events);
    return s;
}

std::string lag_comparison_table(const LagStats& onchain, const LagStats& traditional) {
    std::ostringstream out;
    out << "reporting lag comparison (seconds)\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %10s %14s %16s %12s %8s\n", "mode", "events",
                  "max lag", "mean lag", "bound", "within");
    out << line;
    for (const LagStats* s : {&onchain, &traditional}) {
        std::snprintf(line, sizeof line, "%-12s %10zu %14lld %16.1f %12lld %8s\n",
                      to_string(s->mode), s->events, static_cast<long long>(s->max_lag),
                      s->mean_lag, static_cast<long long>(s->bound),
                      s->within_bound ? "yes" : "no");
        out << line;
    }
    return out.str();
}

// ---------------------------------------------------------------------------

WashReport detect_wash_sales(const std::vector<TransferEvent>& events,
                             std::int64_t window_seconds) {
    require(window_seconds >= 0, Err::InvalidArgument, "window must be >= 0");
    WashReport report;
    report.window_seconds = window_seconds;

    struct Leg {
        const TransferEvent* e;
        bool flagged = false;
    };
    std::map<std::pair<ClassId, Serial>, std::vector<Leg>> by_token;
    for (const TransferEvent& e : events) {
        if (!e.serial || !e.price) continue;
        report.clean_volume += *e.price; // moved to flagged when a pair matches
        by_token[{e.cls, *e.serial}].push_back({&e});
    }

    for (auto& [token, legs] : by_token) {
        for (std::size_t i = 0; i < legs.size(); ++i) {
            if (legs[i].flagged) continue;
            const TransferEvent& a = *legs[i].e;
            for (std::size_t j = i + 1; j < legs.size(); ++j) {
                if (legs[j].flagged) continue;
                const TransferEvent& b = *legs[j].e;
                if (b.block_time - a.block_time > window_seconds) break;
                if (b.from != a.to || b.to != a.from) continue;
                legs[i].flagged = true;
                legs[j].flagged = true;
                Money volume = *a.price + *b.price;
                report.flags.push_back({a.seq, b.seq, token.first, token.second, a.from, a.to,
                                        b.block_time - a.block_time, volume});
                report.flagged_volume += volume;
                report.clean_volume -= volume;
                break;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

IspoSeries ispo_inflows(const std::vector<double>& epoch_rewards, double retention,
                        const std::vector<double>& prices) {
    require(epoch_rewards.size() == prices.size(), Err::LengthMismatch,
            "rewards and prices must have the same length");
    require(retention >= 0.0 && retention <= 1.0, Err::ConfigInvalid,
            "retention out of [0,1]");
    IspoSeries series;
    series.epochs.reserve(epoch_rewards.size());
    for (std::size_t i = 0; i < epoch_rewards.size(); ++i) {
        IspoEpoch e;
        e.epoch = static_cast<int>(i);
        e.rewards = epoch_rewards[i];
        e.retention = retention;
        e.inflow = epoch_rewards[i] * retention;
        e.price = prices[i];
        e.inflow_quote = e.inflow * prices[i];
        series.total_inflow += e.inflow;
        series.total_quote += e.inflow_quote;
        series.epochs.push_back(e);
    }
    return series;
}

} // namespace mbsdao
