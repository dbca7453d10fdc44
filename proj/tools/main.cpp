// mbsdao: command-line surface over the library. Builds loan worlds from
// JSON configs, runs scenarios, and emits the analytics artifacts (JSONL
// event logs, CSV tables, lag reports). Every effect here is a composition
// of library calls; the binary adds argument parsing and file placement.
//
// Exit codes: 0 success, 1 domain error (config content, invariants, IO),
// 2 usage error (bad flags, missing subcommand, nonexistent input path).

#include "mbsdao/dao.hpp"
#include "mbsdao/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace mbsdao;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* synopsis =
    R"(usage: mbsdao <command> [options]
  originate    amortize and originate one loan   --config terms.json [--out DIR]
  pool         originate loans and form a pool   --config pool.json [--out DIR]
  issue        pool plus securities issuance     --config issue.json [--out DIR]
  dao          governance session (replayed from a session file)
               propose|vote|tally|execute --session FILE ...
  simulate     run a scenario                    --seed N [--config scenario.json]
                                                 [--out DIR] [--format csv|jsonl]
  lag-report   investor-visibility lag table     [--seed N] [--config scenario.json] [--out DIR]
  wash-detect  flag round-trip sales             [--window SECONDS] [--in events.jsonl] [--out DIR]
  ispo         staking-inflow table              --config ispo.json [--out DIR]
  export       full scenario dump                [--seed N] [--config scenario.json] [--out DIR]
run 'mbsdao <command> --help' for details; --seed is required for simulate.
)";

// ---------------------------------------------------------------------------
// config plumbing

json load_json(const fs::path& path) {
    std::ifstream in(path);
    require(in.good(), Err::IoError, "cannot read " + path.string());
    json j = json::parse(in, nullptr, false);
    require(!j.is_discarded(), Err::ConfigInvalid, "malformed json in " + path.string());
    return j;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    require(j.is_object(), Err::ConfigInvalid, where + " must be a json object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        require(known, Err::ConfigInvalid, "unknown key \"" + key + "\" in " + where);
    }
}

// Money fields are decimal strings ("1234.56") so config values stay exact.
Money money_from(const json& v, const std::string& where) {
    require(v.is_string(), Err::ConfigInvalid,
            where + " must be a decimal string like \"1234.56\"");
    return parse_money(v.get<std::string>());
}

Money money_field(const json& j, const char* key, std::optional<Money> fallback = {}) {
    if (!j.contains(key)) {
        require(fallback.has_value(), Err::ConfigInvalid, std::string("missing field ") + key);
        return *fallback;
    }
    return money_from(j.at(key), key);
}

Rate rate_field(const json& j, const char* key, Rate fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    require(v.is_number(), Err::ConfigInvalid,
            std::string(key) + " must be a number (annual fraction, e.g. 0.06)");
    return Rate::from_double(v.get<double>());
}

AnnuityTerms terms_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"principal", "rate_annual", "periods_per_year", "n_periods",
                         "rate_kind", "spread", "reset_every", "initial_exchange_date"},
                        "loan terms");
    AnnuityTerms t;
    t.principal = money_field(j, "principal");
    require(j.contains("rate_annual"), Err::ConfigInvalid, "missing field rate_annual");
    t.nominal_rate = rate_field(j, "rate_annual", Rate{});
    t.periods_per_year = j.value("periods_per_year", 12);
    require(j.contains("n_periods"), Err::ConfigInvalid, "missing field n_periods");
    t.n_periods = j.at("n_periods").get<int>();
    t.initial_exchange_date = j.value("initial_exchange_date", std::int64_t{0});
    std::string kind = j.value("rate_kind", std::string("fixed"));
    if (kind == "adjustable") {
        t.rate_kind = RateKind::adjustable;
        t.spread = rate_field(j, "spread", Rate{});
        t.reset_every = j.value("reset_every", 12);
    } else {
        require(kind == "fixed", Err::ConfigInvalid, "rate_kind must be fixed or adjustable");
    }
    return t;
}

SchemeKind scheme_from_string(const std::string& s) {
    if (s == "passthrough") return SchemeKind::passthrough;
    if (s == "waterfall") return SchemeKind::waterfall;
    if (s == "io_po") return SchemeKind::io_po;
    fail(Err::ConfigInvalid, "scheme must be passthrough, waterfall, or io_po");
}

const char* scheme_name(SchemeKind k) {
    switch (k) {
    case SchemeKind::passthrough: return "passthrough";
    case SchemeKind::waterfall: return "waterfall";
    case SchemeKind::io_po: return "io_po";
    case SchemeKind::none: return "none";
    }
    return "?";
}

ScenarioConfig scenario_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"seed", "horizon_months", "n_loans", "loans", "rate_path", "cpr_annual",
                         "cdr_annual", "recovery_haircut", "reporting_mode",
                         "traditional_lag_days", "scheme", "tranche_fractions_ppm"},
                        "scenario config");
    ScenarioConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon_months = j.value("horizon_months", cfg.horizon_months);
    cfg.n_loans = j.value("n_loans", cfg.n_loans);
    if (j.contains("loans")) {
        const json& l = j.at("loans");
        reject_unknown_keys(l, {"principal_lo", "principal_hi", "rate_lo", "rate_hi", "n_periods"},
                            "loans");
        cfg.loans.principal_lo = money_field(l, "principal_lo", cfg.loans.principal_lo);
        cfg.loans.principal_hi = money_field(l, "principal_hi", cfg.loans.principal_hi);
        cfg.loans.rate_lo = rate_field(l, "rate_lo", cfg.loans.rate_lo);
        cfg.loans.rate_hi = rate_field(l, "rate_hi", cfg.loans.rate_hi);
        cfg.loans.n_periods = l.value("n_periods", cfg.loans.n_periods);
    }
    if (j.contains("rate_path"))
        for (const json& r : j.at("rate_path"))
            cfg.rate_path.push_back(Rate::from_double(r.get<double>()));
    cfg.cpr_annual = j.value("cpr_annual", cfg.cpr_annual);
    cfg.cdr_annual = j.value("cdr_annual", cfg.cdr_annual);
    cfg.recovery_haircut = j.value("recovery_haircut", cfg.recovery_haircut);
    if (j.contains("reporting_mode")) {
        std::string m = j.at("reporting_mode").get<std::string>();
        if (m == "onchain") cfg.reporting_mode = ReportingMode::onchain;
        else if (m == "traditional") cfg.reporting_mode = ReportingMode::traditional;
        else fail(Err::ConfigInvalid, "reporting_mode must be onchain or traditional");
    }
    cfg.traditional_lag_days = j.value("traditional_lag_days", cfg.traditional_lag_days);
    if (j.contains("scheme")) cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("tranche_fractions_ppm"))
        cfg.tranche_fractions_ppm = j.at("tranche_fractions_ppm").get<std::vector<std::int64_t>>();
    return cfg;
}

PropertyRecord sim_parcel(int i) {
    char parcel[32];
    std::snprintf(parcel, sizeof parcel, "CLI-%05d", i);
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
    return rec;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// originate / pool / issue

int cmd_originate(const fs::path& config, const fs::path& out) {
    AnnuityTerms terms = terms_from_json(load_json(config));
    Ledger ledger;
    TitleRegistry registry(ledger);
    MortgageBook book(ledger);
    AccountId borrower = ledger.create_account();
    AccountId lender = ledger.create_account();
    ledger.fund(lender, terms.principal);
    Serial title = registry.mint_title(ledger, sim_parcel(0), borrower).token.serial;
    std::uint64_t id = book.originate(ledger, registry, borrower, lender, title, terms,
                                      std::nullopt, terms.principal);

    write_atomic(out / "schedule.csv", schedule_csv(ann_schedule(terms)));
    write_atomic(out / "events.jsonl", events_to_jsonl(ledger.log()));
    const MortgageAccount& m = book.account(id);
    std::cout << "loan " << id << ": principal " << format_money(terms.principal) << ", payment "
              << format_money(m.state.payment) << " x " << terms.n_periods << " periods\n";
    return 0;
}

struct PoolWorld {
    Ledger ledger;
    TitleRegistry registry{ledger};
    MortgageBook book{ledger};
    Securitizer sec{ledger};
    AccountId issuer = 0;
    std::vector<std::uint64_t> loans;
    std::uint64_t pool = 0;
};

void build_pool_world(PoolWorld& w, const json& cfg) {
    require(cfg.contains("loans"), Err::ConfigInvalid, "missing field loans");
    const json& loans = cfg.at("loans");
    require(loans.is_array() && !loans.empty(), Err::ConfigInvalid,
            "loans must be a non-empty array");
    w.issuer = w.ledger.create_account();
    int i = 0;
    for (const json& lj : loans) {
        AnnuityTerms terms = terms_from_json(lj);
        AccountId borrower = w.ledger.create_account();
        Serial title = w.registry.mint_title(w.ledger, sim_parcel(i), borrower).token.serial;
        w.ledger.fund(w.issuer, terms.principal);
        w.loans.push_back(w.book.originate(w.ledger, w.registry, borrower, w.issuer, title, terms,
                                           std::nullopt, terms.principal));
        ++i;
    }
    w.pool = w.sec.form_pool(w.ledger, w.book, w.issuer, w.loans);
}

int cmd_pool(const fs::path& config, const fs::path& out) {
    json j = load_json(config);
    reject_unknown_keys(j, {"loans"}, "pool config");
    PoolWorld w;
    build_pool_world(w, j);

    const Pool& p = w.sec.pool(w.pool);
    json summary;
    summary["pool_id"] = p.id;
    summary["members"] = p.members;
    summary["initial_principal"] = format_money(p.initial_principal);
    summary["wac"] = w.sec.wac(w.pool).to_double();
    write_atomic(out / "pool.json", summary.dump(2) + "\n");
    write_atomic(out / "events.jsonl", events_to_jsonl(w.ledger.log()));
    std::cout << "pool " << p.id << ": " << p.members.size() << " loans, principal "
              << format_money(p.initial_principal) << ", wac "
              << fmt_double(w.sec.wac(w.pool).to_double()) << "\n";
    return 0;
}

int cmd_issue(const fs::path& config, const fs::path& out) {
    json j = load_json(config);
    reject_unknown_keys(j, {"loans", "scheme", "n_shares", "tranches", "io_shares", "po_shares"},
                        "issue config");
    require(j.contains("scheme"), Err::ConfigInvalid, "missing field scheme");
    SchemeKind scheme = scheme_from_string(j.at("scheme").get<std::string>());
    PoolWorld w;
    build_pool_world(w, j);
    const Pool& p = w.sec.pool(w.pool);

    std::ostringstream table;
    switch (scheme) {
    case SchemeKind::passthrough: {
        Money n_shares = j.value("n_shares", Money{1'000'000});
        ClassId cls = w.sec.issue_passthrough(w.ledger, w.pool, n_shares, {{w.issuer, n_shares}});
        table << "token_class,name,units\n"
              << cls << ',' << w.ledger.token_class(cls).name << ',' << n_shares << '\n';
        break;
    }
    case SchemeKind::waterfall: {
        require(j.contains("tranches"), Err::ConfigInvalid,
                "waterfall issuance needs a tranches array");
        std::vector<std::string> names;
        std::vector<std::int64_t> fractions;
        std::vector<std::optional<Rate>> coupons;
        for (const json& tj : j.at("tranches")) {
            reject_unknown_keys(tj, {"name", "fraction_ppm", "coupon"}, "tranche");
            names.push_back(tj.at("name").get<std::string>());
            fractions.push_back(tj.at("fraction_ppm").get<std::int64_t>());
            coupons.push_back(tj.contains("coupon")
                                  ? std::optional<Rate>(rate_field(tj, "coupon", Rate{}))
                                  : std::nullopt);
        }
        std::vector<Money> faces = allocate_largest_remainder(p.initial_principal, fractions);
        std::vector<TrancheSpec> specs;
        for (std::size_t k = 0; k < faces.size(); ++k) {
            require(faces[k] > 0, Err::ConfigInvalid, "tranche face rounded to zero");
            specs.push_back({names[k], faces[k], coupons[k]});
        }
        w.sec.issue_waterfall(w.ledger, w.pool, specs);
        table << "tranche,priority,face,coupon,token_class\n";
        for (const Tranche& t : w.sec.pool(w.pool).tranches)
            table << t.name << ',' << t.priority << ',' << format_money(t.face) << ','
                  << fmt_double(t.coupon.to_double()) << ',' << t.token_class << '\n';
        break;
    }
    case SchemeKind::io_po: {
        Money io_shares = j.value("io_shares", Money{1'000'000});
        Money po_shares = j.value("po_shares", Money{1'000'000});
        auto [io, po] = w.sec.issue_io_po(w.ledger, w.pool, io_shares, po_shares);
        table << "token_class,name,units\n"
              << io << ',' << w.ledger.token_class(io).name << ',' << io_shares << '\n'
              << po << ',' << w.ledger.token_class(po).name << ',' << po_shares << '\n';
        break;
    }
    case SchemeKind::none:
        break; // unreachable; scheme_from_string rejects it
    }

    write_atomic(out / "securities.csv", table.str());
    write_atomic(out / "events.jsonl", events_to_jsonl(w.ledger.log()));
    std::cout << "pool " << p.id << " (" << scheme_name(scheme) << "): " << p.members.size()
              << " loans, principal " << format_money(p.initial_principal) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// dao: a session file holds the world setup plus the op script; each verb
// appends an op, replays the whole script from genesis (cheap, and it keeps
// the file the single source of truth), and persists on success.

struct DaoWorld {
    Ledger ledger;
    std::vector<AccountId> accounts; // 1-based indices in the session file
    std::map<std::string, TokenRef> assets;
    std::optional<Dao> dao;
};

AccountId account_at(const DaoWorld& w, std::int64_t index) {
    require(index >= 1 && index <= static_cast<std::int64_t>(w.accounts.size()),
            Err::ConfigInvalid, "account index " + std::to_string(index) + " out of range");
    return w.accounts[static_cast<std::size_t>(index - 1)];
}

TokenRef asset_at(const DaoWorld& w, const std::string& name) {
    auto it = w.assets.find(name);
    require(it != w.assets.end(), Err::ConfigInvalid, "unknown asset \"" + name + "\"");
    return it->second;
}

void build_dao_world(DaoWorld& w, const json& setup) {
    reject_unknown_keys(setup,
                        {"accounts", "classes", "contributions", "issue_size", "parameters",
                         "funding", "assets"},
                        "dao setup");

    std::int64_t n = setup.value("accounts", std::int64_t{0});
    auto widen = [&n](const json& arr, const char* key) {
        for (const json& e : arr)
            if (e.contains(key)) n = std::max(n, e.at(key).get<std::int64_t>());
    };
    widen(setup.value("contributions", json::array()), "account");
    widen(setup.value("funding", json::array()), "account");
    widen(setup.value("assets", json::array()), "owner");
    require(n >= 1, Err::ConfigInvalid, "dao setup references no accounts");
    for (std::int64_t i = 0; i < n; ++i) w.accounts.push_back(w.ledger.create_account());

    std::vector<GovernanceClassSpec> classes;
    require(setup.contains("classes"), Err::ConfigInvalid, "missing field classes");
    for (const json& c : setup.at("classes")) {
        reject_unknown_keys(c, {"name", "votes_per_token", "max_supply"}, "governance class");
        GovernanceClassSpec spec;
        spec.name = c.at("name").get<std::string>();
        spec.votes_per_token = c.at("votes_per_token").get<std::int64_t>();
        if (c.contains("max_supply")) spec.max_supply = c.at("max_supply").get<Money>();
        classes.push_back(spec);
    }

    std::vector<Contribution> seed;
    require(setup.contains("contributions"), Err::ConfigInvalid, "missing field contributions");
    for (const json& e : setup.at("contributions")) {
        reject_unknown_keys(e, {"account", "amount"}, "contribution");
        AccountId a = account_at(w, e.at("account").get<std::int64_t>());
        Money amount = money_from(e.at("amount"), "contribution amount");
        w.ledger.fund(a, amount);
        seed.push_back({a, amount});
    }

    DaoParameters params;
    if (setup.contains("parameters")) {
        const json& pj = setup.at("parameters");
        reject_unknown_keys(pj,
                            {"quorum_ppm", "pass_threshold_ppm", "dissolve_threshold_ppm",
                             "voting_period_blocks", "acquisition_criteria"},
                            "dao parameters");
        params.quorum_ppm = pj.value("quorum_ppm", params.quorum_ppm);
        params.pass_threshold_ppm = pj.value("pass_threshold_ppm", params.pass_threshold_ppm);
        params.dissolve_threshold_ppm =
            pj.value("dissolve_threshold_ppm", params.dissolve_threshold_ppm);
        params.voting_period_blocks =
            pj.value("voting_period_blocks", params.voting_period_blocks);
        params.acquisition_criteria =
            pj.value("acquisition_criteria", params.acquisition_criteria);
    }

    w.dao.emplace(w.ledger, classes, seed, params, setup.value("issue_size", Money{1'000'000}));
    w.dao->install_royalty_tracking(w.ledger);

    for (const json& e : setup.value("funding", json::array())) {
        reject_unknown_keys(e, {"account", "amount"}, "funding");
        w.ledger.fund(account_at(w, e.at("account").get<std::int64_t>()),
                      money_from(e.at("amount"), "funding amount"));
    }
    for (const json& a : setup.value("assets", json::array())) {
        reject_unknown_keys(a, {"name", "owner", "royalty"}, "asset");
        std::string name = a.at("name").get<std::string>();
        ClassId cls = w.dao->register_asset_class(w.ledger, name, TokenKind::non_fungible, 1,
                                                  Rate::from_double(a.value("royalty", 0.0)));
        w.assets[name] =
            w.ledger.mint_nft(cls, account_at(w, a.at("owner").get<std::int64_t>()), name);
    }
}

VoteChoice choice_from_string(const std::string& s) {
    if (s == "yes") return VoteChoice::yes;
    if (s == "no") return VoteChoice::no;
    if (s == "abstain") return VoteChoice::abstain;
    fail(Err::ConfigInvalid, "choice must be yes, no, or abstain");
}

// Applies one op; returns the proposal id it touched (0 for sales).
std::uint64_t apply_dao_op(DaoWorld& w, const json& op) {
    std::string verb = op.at("op").get<std::string>();
    if (op.contains("at")) w.ledger.advance_time(op.at("at").get<std::int64_t>());

    if (verb == "propose") {
        AccountId proposer = account_at(w, op.at("proposer").get<std::int64_t>());
        std::string kind = op.at("kind").get<std::string>();
        if (kind == "set_parameter")
            return w.dao->propose_parameter(w.ledger, proposer, op.at("key").get<std::string>(),
                                            op.at("value").get<std::int64_t>());
        if (kind == "acquire_asset")
            return w.dao->propose_acquisition(
                w.ledger, proposer, asset_at(w, op.at("asset").get<std::string>()),
                money_from(op.at("price"), "asset price"),
                account_at(w, op.at("seller").get<std::int64_t>()));
        if (kind == "dissolve") return w.dao->propose_dissolve(w.ledger, proposer);
        fail(Err::ConfigInvalid, "unknown proposal kind \"" + kind + "\"");
    }
    if (verb == "vote") {
        std::uint64_t id = op.at("proposal").get<std::uint64_t>();
        w.dao->vote(w.ledger, id, account_at(w, op.at("account").get<std::int64_t>()),
                    choice_from_string(op.at("choice").get<std::string>()));
        return id;
    }
    if (verb == "tally") {
        std::uint64_t id = op.at("proposal").get<std::uint64_t>();
        w.dao->tally(w.ledger, id);
        return id;
    }
    if (verb == "execute") {
        std::uint64_t id = op.at("proposal").get<std::uint64_t>();
        w.dao->execute(w.ledger, id);
        return id;
    }
    if (verb == "sale") {
        // not reachable from the CLI verbs; hand-written ops use it to move
        // assets between session accounts and exercise royalty tracking
        w.ledger.transfer_nft(asset_at(w, op.at("asset").get<std::string>()),
                              account_at(w, op.at("from").get<std::int64_t>()),
                              account_at(w, op.at("to").get<std::int64_t>()),
                              money_from(op.at("price"), "sale price"));
        return 0;
    }
    fail(Err::ConfigInvalid, "unknown op \"" + verb + "\"");
}

int run_dao_session(const fs::path& session_path, json new_op) {
    json session = load_json(session_path);
    reject_unknown_keys(session, {"setup", "ops"}, "dao session");
    require(session.contains("setup"), Err::ConfigInvalid, "missing field setup");
    json ops = session.value("ops", json::array());
    ops.push_back(std::move(new_op));

    DaoWorld w;
    build_dao_world(w, session.at("setup"));
    std::uint64_t last = 0;
    for (const json& op : ops) last = apply_dao_op(w, op);

    session["ops"] = std::move(ops);
    write_atomic(session_path, session.dump(2) + "\n");

    if (last != 0) {
        const Proposal& p = w.dao->proposal(last);
        TallyResult t = w.dao->tally_result(last);
        std::cout << "proposal " << p.id << " (" << to_string(p.kind)
                  << "): " << to_string(p.status) << "; yes " << t.yes << " no " << t.no
                  << " abstain " << t.abstain << " of " << p.total_eligible
                  << " eligible; closes at " << p.closes_at << "\n";
    }
    std::cout << "treasury balance: " << format_money(w.dao->treasury_balance(w.ledger)) << "\n";
    if (w.dao->dissolved())
        std::cout << "dao dissolved; distributions paid: "
                  << format_money(w.dao->distributions_paid()) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// scenario-backed commands

json scenario_summary(const Scenario& s, const LagStats& onchain, const LagStats& traditional) {
    const ScenarioTotals& t = s.totals();
    const Pool& p = s.securitizer().pool(s.pool_id());
    json j;
    j["seed"] = s.config().seed;
    j["horizon_months"] = s.config().horizon_months;
    j["n_loans"] = s.config().n_loans;
    j["scheme"] = scheme_name(s.config().scheme);
    j["pool"] = {{"initial_principal", format_money(p.initial_principal)},
                 {"balance", format_money(p.balance)},
                 {"cumulative_loss", format_money(p.cumulative_loss)}};
    j["totals"] = {{"borrower_payments", format_money(t.borrower_payments)},
                   {"guarantee_payouts", format_money(t.guarantee_payouts)},
                   {"recoveries", format_money(t.recoveries)},
                   {"distributions", format_money(t.distributions)},
                   {"servicing", format_money(t.servicing)},
                   {"losses", format_money(t.losses)},
                   {"loans_matured", t.loans_matured},
                   {"loans_prepaid", t.loans_prepaid},
                   {"loans_foreclosed", t.loans_foreclosed}};
    j["events"] = s.ledger().log().size();
    j["lag"] = {{"onchain_max_seconds", onchain.max_lag},
                {"traditional_max_seconds", traditional.max_lag}};
    return j;
}

ScenarioConfig load_scenario_config(const std::string& config_path,
                                    std::optional<std::uint64_t> seed) {
    ScenarioConfig cfg;
    if (!config_path.empty()) cfg = scenario_from_json(load_json(config_path));
    if (seed) cfg.seed = *seed;
    return cfg;
}

std::pair<LagStats, LagStats> lag_stats_pair(const Scenario& s) {
    const std::vector<PeriodReport>& reports = s.reports();
    std::int64_t interval = s.ledger().block_interval();
    std::int64_t days = s.config().traditional_lag_days;
    return {reporting_lag_stats(reports, ReportingMode::onchain, interval, days),
            reporting_lag_stats(reports, ReportingMode::traditional, interval, days)};
}

int cmd_simulate(const ScenarioConfig& cfg, const fs::path& out, const std::string& format) {
    Scenario s(cfg);
    const std::vector<PeriodReport>& reports = s.run();

    write_atomic(out / "events.jsonl", events_to_jsonl(s.ledger().log()));
    if (format == "jsonl")
        write_atomic(out / "period_reports.jsonl", period_reports_jsonl(reports));
    else
        write_atomic(out / "period_reports.csv", period_reports_csv(reports));
    if (cfg.scheme == SchemeKind::waterfall)
        write_atomic(out / "tranches.csv",
                     tranche_report_csv(s.securitizer().report(s.pool_id())));

    auto [onchain, traditional] = lag_stats_pair(s);
    write_atomic(out / "lag.txt", lag_comparison_table(onchain, traditional));
    write_atomic(out / "summary.json", scenario_summary(s, onchain, traditional).dump(2) + "\n");

    const ScenarioTotals& t = s.totals();
    std::cout << "seed " << cfg.seed << ": " << cfg.n_loans << " loans x " << cfg.horizon_months
              << " months (" << scheme_name(cfg.scheme) << "); distributed "
              << format_money(t.distributions) << ", servicing " << format_money(t.servicing)
              << ", losses " << format_money(t.losses) << "; matured " << t.loans_matured
              << " prepaid " << t.loans_prepaid << " foreclosed " << t.loans_foreclosed << "\n";
    return 0;
}

int cmd_lag_report(const ScenarioConfig& cfg, const fs::path& out) {
    Scenario s(cfg);
    s.run();
    auto [onchain, traditional] = lag_stats_pair(s);
    std::string table = lag_comparison_table(onchain, traditional);
    write_atomic(out / "lag.txt", table);
    std::cout << table;
    return 0;
}

int cmd_wash_detect(std::int64_t window, const std::string& in, const fs::path& out) {
    std::vector<TransferEvent> events;
    if (!in.empty()) {
        std::ifstream file(in);
        require(file.good(), Err::IoError, "cannot read " + in);
        events = events_from_jsonl(file);
    } else {
        events = events_from_jsonl(std::cin);
    }
    WashReport report = detect_wash_sales(events, window);
    write_atomic(out / "wash.csv", wash_report_csv(report));
    std::cout << "pairs flagged: " << report.flags.size() << "\n"
              << "flagged volume: " << format_money(report.flagged_volume) << "\n"
              << "clean volume: " << format_money(report.clean_volume) << "\n"
              << "total priced volume: " << format_money(report.total_priced_volume()) << "\n";
    return 0;
}

int cmd_ispo(const fs::path& config, const fs::path& out) {
    json j = load_json(config);
    reject_unknown_keys(j, {"rewards", "retention", "prices"}, "ispo config");
    require(j.contains("rewards") && j.contains("retention") && j.contains("prices"),
            Err::ConfigInvalid, "ispo config needs rewards, retention, and prices");
    IspoSeries series =
        ispo_inflows(j.at("rewards").get<std::vector<double>>(), j.at("retention").get<double>(),
                     j.at("prices").get<std::vector<double>>());
    write_atomic(out / "ispo.csv", ispo_csv(series));
    std::cout << "epochs " << series.epochs.size() << ": total inflow "
              << fmt_double(series.total_inflow) << ", total quote value "
              << fmt_double(series.total_quote) << "\n";
    return 0;
}

int cmd_export(const ScenarioConfig& cfg, const fs::path& out) {
    Scenario s(cfg);
    const std::vector<PeriodReport>& reports = s.run();

    write_atomic(out / "events.jsonl", events_to_jsonl(s.ledger().log()));
    write_atomic(out / "period_reports.csv", period_reports_csv(reports));
    write_atomic(out / "period_reports.jsonl", period_reports_jsonl(reports));
    if (cfg.scheme == SchemeKind::waterfall)
        write_atomic(out / "tranches.csv",
                     tranche_report_csv(s.securitizer().report(s.pool_id())));
    write_atomic(out / "balances.csv", balances_csv(s.ledger()));
    for (std::uint64_t id : s.loan_ids()) {
        char name[32];
        std::snprintf(name, sizeof name, "loan_%llu.csv", static_cast<unsigned long long>(id));
        write_atomic(out / "loans" / name, loan_history_csv(s.book().account(id)));
    }

    auto [onchain, traditional] = lag_stats_pair(s);
    write_atomic(out / "lag.txt", lag_comparison_table(onchain, traditional));
    write_atomic(out / "summary.json", scenario_summary(s, onchain, traditional).dump(2) + "\n");
    std::cout << "exported " << s.ledger().log().size() << " events and " << reports.size()
              << " period reports to " << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic mortgage-securitization sandbox"};
    app.require_subcommand(1);
    std::function<int()> run;

    // originate -------------------------------------------------------------
    auto* originate = app.add_subcommand("originate", "amortize and originate one loan");
    std::string orig_config, orig_out = "out";
    originate->add_option("--config", orig_config, "loan terms json")
        ->required()
        ->check(CLI::ExistingFile);
    originate->add_option("--out", orig_out, "output directory");
    originate->callback(
        [&] { run = [&] { return cmd_originate(orig_config, orig_out); }; });

    // pool ------------------------------------------------------------------
    auto* pool = app.add_subcommand("pool", "originate loans and form a pool");
    std::string pool_config, pool_out = "out";
    pool->add_option("--config", pool_config, "pool json")->required()->check(CLI::ExistingFile);
    pool->add_option("--out", pool_out, "output directory");
    pool->callback([&] { run = [&] { return cmd_pool(pool_config, pool_out); }; });

    // issue -----------------------------------------------------------------
    auto* issue = app.add_subcommand("issue", "pool loans and issue securities");
    std::string issue_config, issue_out = "out";
    issue->add_option("--config", issue_config, "issue json")
        ->required()
        ->check(CLI::ExistingFile);
    issue->add_option("--out", issue_out, "output directory");
    issue->callback([&] { run = [&] { return cmd_issue(issue_config, issue_out); }; });

    // dao -------------------------------------------------------------------
    auto* dao = app.add_subcommand("dao", "governance session ops");
    dao->require_subcommand(1);
    std::string dao_session, dao_kind, dao_key, dao_asset, dao_choice, dao_price;
    std::int64_t dao_at = 0, dao_value = 0, dao_proposer = 0, dao_seller = 0, dao_account = 0;
    std::uint64_t dao_proposal = 0;

    auto add_session = [&](CLI::App* sub) {
        sub->add_option("--session", dao_session, "session json (setup plus op script)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--at", dao_at, "advance the clock to this time first");
    };

    auto* propose = dao->add_subcommand("propose", "open a proposal");
    add_session(propose);
    propose->add_option("--kind", dao_kind, "set_parameter | acquire_asset | dissolve")
        ->required()
        ->check(CLI::IsMember({"set_parameter", "acquire_asset", "dissolve"}));
    propose->add_option("--proposer", dao_proposer, "account index")->required();
    propose->add_option("--key", dao_key, "parameter key (set_parameter)");
    propose->add_option("--value", dao_value, "parameter value (set_parameter)");
    propose->add_option("--asset", dao_asset, "asset name (acquire_asset)");
    propose->add_option("--seller", dao_seller, "seller account index (acquire_asset)");
    propose->add_option("--price", dao_price, "offer price (acquire_asset)");
    propose->callback([&] {
        run = [&, propose] {
            json op{{"op", "propose"}, {"kind", dao_kind}, {"proposer", dao_proposer}};
            if (dao_kind == "set_parameter") {
                require(propose->count("--key") && propose->count("--value"), Err::ConfigInvalid,
                        "set_parameter needs --key and --value");
                op["key"] = dao_key;
                op["value"] = dao_value;
            } else if (dao_kind == "acquire_asset") {
                require(propose->count("--asset") && propose->count("--seller") &&
                            propose->count("--price"),
                        Err::ConfigInvalid, "acquire_asset needs --asset, --seller, and --price");
                op["asset"] = dao_asset;
                op["seller"] = dao_seller;
                op["price"] = dao_price;
            }
            if (propose->count("--at")) op["at"] = dao_at;
            return run_dao_session(dao_session, std::move(op));
        };
    });

    auto* vote = dao->add_subcommand("vote", "cast or replace a ballot");
    add_session(vote);
    vote->add_option("--proposal", dao_proposal, "proposal id")->required();
    vote->add_option("--account", dao_account, "account index")->required();
    vote->add_option("--choice", dao_choice, "yes | no | abstain")
        ->required()
        ->check(CLI::IsMember({"yes", "no", "abstain"}));
    vote->callback([&] {
        run = [&, vote] {
            json op{{"op", "vote"},
                    {"proposal", dao_proposal},
                    {"account", dao_account},
                    {"choice", dao_choice}};
            if (vote->count("--at")) op["at"] = dao_at;
            return run_dao_session(dao_session, std::move(op));
        };
    });

    auto* tally = dao->add_subcommand("tally", "settle a proposal whose window closed");
    add_session(tally);
    tally->add_option("--proposal", dao_proposal, "proposal id")->required();
    tally->callback([&] {
        run = [&, tally] {
            json op{{"op", "tally"}, {"proposal", dao_proposal}};
            if (tally->count("--at")) op["at"] = dao_at;
            return run_dao_session(dao_session, std::move(op));
        };
    });

    auto* execute = dao->add_subcommand("execute", "apply a passed proposal");
    add_session(execute);
    execute->add_option("--proposal", dao_proposal, "proposal id")->required();
    execute->callback([&] {
        run = [&, execute] {
            json op{{"op", "execute"}, {"proposal", dao_proposal}};
            if (execute->count("--at")) op["at"] = dao_at;
            return run_dao_session(dao_session, std::move(op));
        };
    });

    // simulate --------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "run a scenario");
    std::uint64_t sim_seed = 0;
    std::string sim_config, sim_out = "out", sim_format = "csv";
    simulate->add_option("--seed", sim_seed, "rng seed (required)")->required();
    simulate->add_option("--config", sim_config, "scenario json")->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "output directory");
    simulate->add_option("--format", sim_format, "period-report format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    simulate->callback([&] {
        run = [&] {
            return cmd_simulate(load_scenario_config(sim_config, sim_seed), sim_out, sim_format);
        };
    });

    // lag-report ------------------------------------------------------------
    auto* lag = app.add_subcommand("lag-report", "investor-visibility lag table");
    std::uint64_t lag_seed = 0;
    std::string lag_config, lag_out = "out";
    lag->add_option("--seed", lag_seed, "rng seed");
    lag->add_option("--config", lag_config, "scenario json")->check(CLI::ExistingFile);
    lag->add_option("--out", lag_out, "output directory");
    lag->callback([&] {
        run = [&, lag] {
            std::optional<std::uint64_t> seed;
            if (lag->count("--seed")) seed = lag_seed;
            return cmd_lag_report(load_scenario_config(lag_config, seed), lag_out);
        };
    });

    // wash-detect -----------------------------------------------------------
    auto* wash = app.add_subcommand("wash-detect", "flag round-trip sales in an event log");
    std::int64_t wash_window = 3'600;
    std::string wash_in, wash_out = "out";
    wash->add_option("--window", wash_window, "pairing window in seconds")
        ->check(CLI::PositiveNumber);
    wash->add_option("--in", wash_in, "events jsonl (default: stdin)")->check(CLI::ExistingFile);
    wash->add_option("--out", wash_out, "output directory");
    wash->callback(
        [&] { run = [&] { return cmd_wash_detect(wash_window, wash_in, wash_out); }; });

    // ispo ------------------------------------------------------------------
    auto* ispo = app.add_subcommand("ispo", "staking-inflow table");
    std::string ispo_config, ispo_out = "out";
    ispo->add_option("--config", ispo_config, "ispo json")->required()->check(CLI::ExistingFile);
    ispo->add_option("--out", ispo_out, "output directory");
    ispo->callback([&] { run = [&] { return cmd_ispo(ispo_config, ispo_out); }; });

    // export ----------------------------------------------------------------
    auto* exp = app.add_subcommand("export", "full scenario dump");
    std::uint64_t exp_seed = 0;
    std::string exp_config, exp_out = "out";
    exp->add_option("--seed", exp_seed, "rng seed");
    exp->add_option("--config", exp_config, "scenario json")->check(CLI::ExistingFile);
    exp->add_option("--out", exp_out, "output directory");
    exp->callback([&] {
        run = [&, exp] {
            std::optional<std::uint64_t> seed;
            if (exp->count("--seed")) seed = exp_seed;
            return cmd_export(load_scenario_config(exp_config, seed), exp_out);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: " << e.what() << "\n" << synopsis;
        return 2;
    }

    try {
        return run ? run() : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
