#include "mbsdao/dao.hpp"

#include "mbsdao/errors.hpp"
#include "mbsdao/money.hpp"

#include <algorithm>
#include <limits>

namespace mbsdao {

const char* to_string(ProposalKind k) {
    switch (k) {
    case ProposalKind::set_parameter: return "set_parameter";
    case ProposalKind::authorize_foreclosure: return "authorize_foreclosure";
    case ProposalKind::acquire_asset: return "acquire_asset";
    case ProposalKind::dissolve: return "dissolve";
    }
    return "?";
}

const char* to_string(VoteChoice c) {
    switch (c) {
    case VoteChoice::yes: return "yes";
    case VoteChoice::no: return "no";
    case VoteChoice::abstain: return "abstain";
    }
    return "?";
}

const char* to_string(ProposalStatus s) {
    switch (s) {
    case ProposalStatus::open: return "open";
    case ProposalStatus::passed: return "passed";
    case ProposalStatus::failed: return "failed";
    case ProposalStatus::executed: return "executed";
    }
    return "?";
}

namespace {

bool ppm_in_range(std::int64_t v) { return v > 0 && v <= 1'000'000; }

void validate_parameters(const DaoParameters& p) {
    require(ppm_in_range(p.quorum_ppm), Err::ConfigInvalid, "quorum_ppm out of (0, 1e6]");
    require(ppm_in_range(p.pass_threshold_ppm), Err::ConfigInvalid,
            "pass_threshold_ppm out of (0, 1e6]");
    require(ppm_in_range(p.dissolve_threshold_ppm), Err::ConfigInvalid,
            "dissolve_threshold_ppm out of (0, 1e6]");
    require(p.voting_period_blocks >= 1, Err::ConfigInvalid,
            "voting period must be at least one block");
}

} // namespace

Dao::Dao(Ledger& ledger, const std::vector<GovernanceClassSpec>& classes,
         const std::vector<Contribution>& seed, DaoParameters params, Money issue_size)
    : params_(std::move(params)) {
    validate_parameters(params_);
    require(!classes.empty(), Err::ConfigInvalid, "dao needs at least one governance class");
    bool any_weight = false;
    for (const auto& spec : classes) {
        require(spec.votes_per_token >= 0, Err::ConfigInvalid, "votes per token must be >= 0");
        any_weight = any_weight || spec.votes_per_token > 0;
    }
    require(any_weight, Err::ConfigInvalid, "no governance class carries voting weight");
    require(issue_size > 0, Err::ConfigInvalid, "issue size must be positive");

    treasury_ = ledger.create_account();
    classes_.reserve(classes.size());
    for (const auto& spec : classes) {
        ClassId cls = ledger.register_class(spec.name, TokenKind::fungible, spec.max_supply, {},
                                            {}, spec.votes_per_token);
        classes_.push_back({cls, spec.votes_per_token});
    }

    require(!seed.empty(), Err::EmptySeed, "dao cannot start with zero contributions");
    std::vector<std::int64_t> amounts;
    amounts.reserve(seed.size());
    for (const auto& c : seed) {
        require(c.amount > 0, Err::EmptySeed, "seed contributions must be positive");
        amounts.push_back(c.amount);
    }
    const auto shares = allocate_largest_remainder(issue_size, amounts);
    for (std::size_t i = 0; i < seed.size(); ++i) {
        ledger.pay(seed[i].account, treasury_, seed[i].amount);
        seed_total_ += seed[i].amount;
        if (shares[i] > 0) ledger.mint_fungible(classes_.front().cls, seed[i].account, shares[i]);
    }
}

std::int64_t Dao::voting_weight_of(const Ledger& ledger, AccountId account) const {
    __int128 w = 0;
    for (const auto& gc : classes_)
        w += static_cast<__int128>(ledger.balance_of(account, gc.cls)) * gc.votes_per_token;
    require(w <= std::numeric_limits<std::int64_t>::max(), Err::InvariantViolated,
            "voting weight overflow");
    return static_cast<std::int64_t>(w);
}

std::int64_t Dao::total_eligible_weight(const Ledger& ledger) const {
    __int128 w = 0;
    for (const auto& gc : classes_)
        w += static_cast<__int128>(ledger.circulating(gc.cls)) * gc.votes_per_token;
    require(w <= std::numeric_limits<std::int64_t>::max(), Err::InvariantViolated,
            "eligible voting weight overflow");
    return static_cast<std::int64_t>(w);
}

const Proposal& Dao::proposal(std::uint64_t id) const {
    auto it = proposals_.find(id);
    require(it != proposals_.end(), Err::InvalidArgument, "unknown proposal");
    return it->second;
}

Proposal& Dao::proposal_mut(std::uint64_t id) {
    auto it = proposals_.find(id);
    require(it != proposals_.end(), Err::InvalidArgument, "unknown proposal");
    return it->second;
}

std::uint64_t Dao::open_proposal(Ledger& ledger, AccountId proposer, Proposal p) {
    require(!dissolved_, Err::EventOutOfOrder, "dao is dissolved");
    require(voting_weight_of(ledger, proposer) >= 1, Err::NotTokenholder,
            "proposer holds no voting tokens");
    p.id = next_id_++;
    p.proposer = proposer;
    p.opened_at = ledger.next_block_time();
    p.closes_at = p.opened_at + params_.voting_period_blocks * ledger.block_interval();
    p.total_eligible = total_eligible_weight(ledger);
    auto [it, inserted] = proposals_.emplace(p.id, std::move(p));
    (void)inserted;
    return it->first;
}

std::uint64_t Dao::propose_parameter(Ledger& ledger, AccountId proposer, const std::string& key,
                                     std::int64_t value) {
    // Validate eagerly so a proposal that could never execute is rejected at
    // the door rather than after a full vote.
    if (key == "quorum_ppm" || key == "pass_threshold_ppm" || key == "dissolve_threshold_ppm") {
        require(ppm_in_range(value), Err::InvalidArgument, key + " out of (0, 1e6]");
    } else if (key == "voting_period_blocks") {
        require(value >= 1, Err::InvalidArgument, "voting period must be at least one block");
    } else {
        require(false, Err::InvalidArgument, "unknown parameter key: " + key);
    }
    Proposal p;
    p.kind = ProposalKind::set_parameter;
    p.key = key;
    p.value = value;
    return open_proposal(ledger, proposer, std::move(p));
}

std::uint64_t Dao::propose_foreclosure(Ledger& ledger, AccountId proposer,
                                       std::uint64_t mortgage_id) {
    Proposal p;
    p.kind = ProposalKind::authorize_foreclosure;
    p.mortgage_id = mortgage_id;
    return open_proposal(ledger, proposer, std::move(p));
}

std::uint64_t Dao::propose_acquisition(Ledger& ledger, AccountId proposer, TokenRef asset,
                                       Money price, AccountId seller) {
    require(price >= 0, Err::InvalidArgument, "price must be non-negative");
    Proposal p;
    p.kind = ProposalKind::acquire_asset;
    p.asset = asset;
    p.asset_price = price;
    p.asset_seller = seller;
    return open_proposal(ledger, proposer, std::move(p));
}

std::uint64_t Dao::propose_dissolve(Ledger& ledger, AccountId proposer) {
    Proposal p;
    p.kind = ProposalKind::dissolve;
    return open_proposal(ledger, proposer, std::move(p));
}

void Dao::vote(Ledger& ledger, std::uint64_t proposal, AccountId account, VoteChoice choice) {
    Proposal& p = proposal_mut(proposal);
    require(p.status == ProposalStatus::open, Err::VotingClosed, "proposal already settled");
    require(ledger.now() <= p.closes_at, Err::VotingClosed, "voting window has ended");
    std::int64_t weight = voting_weight_of(ledger, account);
    require(weight >= 1, Err::NotTokenholder, "voter holds no voting tokens");
    p.votes[account] = VoteRecord{choice, weight};
}

TallyResult Dao::tally_result(std::uint64_t id) const {
    const Proposal& p = proposal(id);
    TallyResult r;
    for (const auto& [account, rec] : p.votes) {
        (void)account;
        switch (rec.choice) {
        case VoteChoice::yes: r.yes += rec.weight; break;
        case VoteChoice::no: r.no += rec.weight; break;
        case VoteChoice::abstain: r.abstain += rec.weight; break;
        }
    }
    r.quorum_met = static_cast<__int128>(r.cast()) * 1'000'000 >=
                   static_cast<__int128>(params_.quorum_ppm) * p.total_eligible;
    const std::int64_t threshold = p.kind == ProposalKind::dissolve
                                       ? params_.dissolve_threshold_ppm
                                       : params_.pass_threshold_ppm;
    const bool majority = static_cast<__int128>(r.yes) * 1'000'000 >
                          static_cast<__int128>(threshold) * (r.yes + r.no);
    r.passed = r.quorum_met && majority;
    return r;
}

ProposalStatus Dao::tally(Ledger& ledger, std::uint64_t proposal) {
    Proposal& p = proposal_mut(proposal);
    if (p.status != ProposalStatus::open) return p.status;
    if (ledger.now() < p.closes_at) return ProposalStatus::open;
    p.status = tally_result(proposal).passed ? ProposalStatus::passed : ProposalStatus::failed;
    return p.status;
}

void Dao::execute(Ledger& ledger, std::uint64_t proposal) {
    if (proposal_mut(proposal).status == ProposalStatus::open) tally(ledger, proposal);
    Proposal& p = proposal_mut(proposal);
    require(p.status != ProposalStatus::executed, Err::AlreadyExecuted,
            "proposal already executed");
    require(p.status == ProposalStatus::passed, Err::NotPassed, "proposal has not passed");
    switch (p.kind) {
    case ProposalKind::set_parameter:
        apply_parameter(p.key, p.value);
        break;
    case ProposalKind::authorize_foreclosure:
        require(static_cast<bool>(authorize_foreclosure_), Err::ConfigInvalid,
                "no foreclosure authorizer installed");
        authorize_foreclosure_(p.mortgage_id);
        break;
    case ProposalKind::acquire_asset:
        ledger.transfer_nft(p.asset, p.asset_seller, treasury_, p.asset_price);
        acquisitions_ += p.asset_price;
        break;
    case ProposalKind::dissolve:
        dissolve(ledger);
        break;
    }
    p.status = ProposalStatus::executed;
}

void Dao::apply_parameter(const std::string& key, std::int64_t value) {
    if (key == "quorum_ppm") params_.quorum_ppm = value;
    else if (key == "pass_threshold_ppm") params_.pass_threshold_ppm = value;
    else if (key == "dissolve_threshold_ppm") params_.dissolve_threshold_ppm = value;
    else if (key == "voting_period_blocks") params_.voting_period_blocks = value;
    else require(false, Err::InvalidArgument, "unknown parameter key: " + key);
    validate_parameters(params_);
}

void Dao::dissolve(Ledger& ledger) {
    const Money pot = ledger.stable_balance(treasury_);
    if (pot > 0) {
        // Every unit of a weighted class shares alike; the treasury's own
        // holdings (if any) are not paid back to itself.
        std::map<AccountId, Money> units;
        for (const auto& gc : classes_) {
            if (gc.votes_per_token <= 0) continue;
            auto it = ledger.fungible_balances().find(gc.cls);
            if (it == ledger.fungible_balances().end()) continue;
            for (const auto& [account, bal] : it->second) {
                if (bal <= 0 || account == treasury_) continue;
                units[account] += bal;
            }
        }
        require(!units.empty(), Err::InvariantViolated,
                "no governance holders to receive dissolution");
        std::vector<AccountId> accounts;
        std::vector<std::int64_t> weights;
        accounts.reserve(units.size());
        weights.reserve(units.size());
        for (const auto& [account, unit_count] : units) {
            accounts.push_back(account);
            weights.push_back(unit_count);
        }
        const auto shares = allocate_largest_remainder(pot, weights);
        for (std::size_t i = 0; i < accounts.size(); ++i)
            if (shares[i] > 0) ledger.pay(treasury_, accounts[i], shares[i]);
        distributions_ += pot;
    }
    dissolved_ = true;
}

void Dao::credit_royalty(Money amount) {
    require(amount >= 0, Err::InvalidArgument, "royalty must be non-negative");
    royalties_ += amount;
}

void Dao::install_royalty_tracking(Ledger& ledger) {
    ledger.set_royalty_hook([this](ClassId, AccountId to, Money amount) {
        if (to == treasury_) credit_royalty(amount);
    });
}

ClassId Dao::register_asset_class(Ledger& ledger, std::string name, TokenKind kind,
                                  std::optional<Money> max_supply, Rate royalty) {
    return ledger.register_class(std::move(name), kind, max_supply, royalty, treasury_);
}

void Dao::set_foreclosure_authorizer(std::function<void(std::uint64_t)> fn) {
    authorize_foreclosure_ = std::move(fn);
}

} // namespace mbsdao
