#pragma once

// Governance over the ledger: weighted multi-class voting tokens, a proposal
// lifecycle (parameter changes, foreclosure authorization, asset
// acquisition, dissolution), quorum/threshold tallying in parts-per-million,
// and a treasury account that accumulates seed capital and royalty inflows.

#include "mbsdao/ledger.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbsdao {

struct GovernanceClassSpec {
    std::string name;
    std::int64_t votes_per_token = 0;
    std::optional<Money> max_supply;
};

struct GovernanceClass {
    ClassId cls = 0;
    std::int64_t votes_per_token = 0;
};

struct DaoParameters {
    std::int64_t quorum_ppm = 200'000;          // of eligible voting weight
    std::int64_t pass_threshold_ppm = 500'000;  // of yes+no, strict majority
    std::int64_t dissolve_threshold_ppm = 666'666; // supermajority, strict
    std::int64_t voting_period_blocks = 144;    // one day of 600 s blocks
    std::string acquisition_criteria;           // advisory description
};

enum class ProposalKind { set_parameter, authorize_foreclosure, acquire_asset, dissolve };
enum class VoteChoice { yes, no, abstain };
enum class ProposalStatus { open, passed, failed, executed };

const char* to_string(ProposalKind k);
const char* to_string(VoteChoice c);
const char* to_string(ProposalStatus s);

struct VoteRecord {
    VoteChoice choice = VoteChoice::abstain;
    std::int64_t weight = 0; // locked when the vote is cast
};

struct Proposal {
    std::uint64_t id = 0;
    ProposalKind kind = ProposalKind::set_parameter;
    AccountId proposer = 0;
    std::string key;        // set_parameter
    std::int64_t value = 0; // set_parameter
    std::uint64_t mortgage_id = 0; // authorize_foreclosure
    TokenRef asset;                // acquire_asset
    Money asset_price = 0;
    AccountId asset_seller = 0;
    std::int64_t opened_at = 0;
    std::int64_t closes_at = 0;
    std::int64_t total_eligible = 0; // voting-weight snapshot at open
    std::map<AccountId, VoteRecord> votes;
    ProposalStatus status = ProposalStatus::open;
};

struct TallyResult {
    std::int64_t yes = 0;
    std::int64_t no = 0;
    std::int64_t abstain = 0;
    bool quorum_met = false;
    bool passed = false;
    std::int64_t cast() const { return yes + no + abstain; }
};

struct Contribution {
    AccountId account = 0;
    Money amount = 0;
};

class Dao {
public:
    // Registers the governance classes, opens the treasury, moves the seed
    // contributions into it, and mints `issue_size` units of the first class
    // pro-rata to the contributors (largest remainder).
    Dao(Ledger& ledger, const std::vector<GovernanceClassSpec>& classes,
        const std::vector<Contribution>& seed, DaoParameters params = {},
        Money issue_size = 1'000'000);

    Dao(const Dao&) = delete;
    Dao& operator=(const Dao&) = delete;

    // Proposals. The proposer must carry at least one unit of voting weight.
    std::uint64_t propose_parameter(Ledger& ledger, AccountId proposer,
                                    const std::string& key, std::int64_t value);
    std::uint64_t propose_foreclosure(Ledger& ledger, AccountId proposer,
                                      std::uint64_t mortgage_id);
    std::uint64_t propose_acquisition(Ledger& ledger, AccountId proposer, TokenRef asset,
                                      Money price, AccountId seller);
    std::uint64_t propose_dissolve(Ledger& ledger, AccountId proposer);

    // Casting again replaces the account's earlier vote; the weight is
    // whatever the account holds at cast time.
    void vote(Ledger& ledger, std::uint64_t proposal, AccountId account, VoteChoice choice);

    // Pure view of the current sums and what they would decide.
    TallyResult tally_result(std::uint64_t proposal) const;

    // Settles an open proposal once the window has closed; before closes_at
    // it stays open. Quorum is measured against the eligible-weight snapshot,
    // passage against yes/(yes+no) — dissolution uses its own threshold.
    ProposalStatus tally(Ledger& ledger, std::uint64_t proposal);

    // Applies a passed proposal exactly once.
    void execute(Ledger& ledger, std::uint64_t proposal);

    // Books a royalty that arrived at the treasury (wired by
    // install_royalty_tracking).
    void credit_royalty(Money amount);
    // Points the ledger's royalty hook at this DAO's books.
    void install_royalty_tracking(Ledger& ledger);
    // Registers a token class whose secondary-sale royalties pay the
    // treasury.
    ClassId register_asset_class(Ledger& ledger, std::string name, TokenKind kind,
                                 std::optional<Money> max_supply, Rate royalty);

    // The mortgage-book side of authorize_foreclosure proposals.
    void set_foreclosure_authorizer(std::function<void(std::uint64_t)> fn);

    std::int64_t voting_weight_of(const Ledger& ledger, AccountId account) const;
    std::int64_t total_eligible_weight(const Ledger& ledger) const;

    AccountId treasury() const { return treasury_; }
    Money treasury_balance(const Ledger& ledger) const {
        return ledger.stable_balance(treasury_);
    }
    const DaoParameters& parameters() const { return params_; }
    const std::vector<GovernanceClass>& classes() const { return classes_; }
    const Proposal& proposal(std::uint64_t id) const;
    const std::map<std::uint64_t, Proposal>& proposals() const { return proposals_; }
    bool dissolved() const { return dissolved_; }

    Money seed_total() const { return seed_total_; }
    Money royalties_received() const { return royalties_; }
    Money acquisitions_spent() const { return acquisitions_; }
    Money distributions_paid() const { return distributions_; }

private:
    Proposal& proposal_mut(std::uint64_t id);
    std::uint64_t open_proposal(Ledger& ledger, AccountId proposer, Proposal p);
    void apply_parameter(const std::string& key, std::int64_t value);
    void dissolve(Ledger& ledger);

    DaoParameters params_;
    AccountId treasury_ = 0;
    std::vector<GovernanceClass> classes_;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, Proposal> proposals_;
    std::function<void(std::uint64_t)> authorize_foreclosure_;
    bool dissolved_ = false;
    Money seed_total_ = 0;
    Money royalties_ = 0;
    Money acquisitions_ = 0;
    Money distributions_ = 0;
};

} // namespace mbsdao
