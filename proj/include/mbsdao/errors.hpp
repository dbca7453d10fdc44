#pragma once

#include <stdexcept>
#include <string>

namespace mbsdao {

// Every named failure condition in the library. Callers that need to branch
// on the reason catch mbsdao::Error and switch on code().
enum class Err {
    // ledger
    SupplyExceeded,
    UnknownClass,
    UnknownAccount,
    UnknownToken,
    NotOwner,
    InsufficientFunds,
    TokenLocked,
    // tokenization
    WeightsInvalid,
    DuplicateParcel,
    Encumbered,
    AlreadyEncumbered,
    NotLienholder,
    // contract kernel
    EventOutOfOrder,
    NotAdjustable,
    NotResetBoundary,
    SeizeWithoutDefault,
    // mortgage lifecycle
    TitleEncumbered,
    LenderUnderfunded,
    NotInDefault,
    VoteNotPassed,
    Overpayment,
    // securitization
    AlreadyPooled,
    EmptyPool,
    // governance
    EmptySeed,
    NotTokenholder,
    VotingClosed,
    NotPassed,
    AlreadyExecuted,
    // scenario / analytics
    LengthMismatch,
    ConfigInvalid,
    InvariantViolated,
    // serialization / filesystem
    IoError,
    // generic precondition failure
    InvalidArgument,
};

const char* to_string(Err e);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Err code, const std::string& what) {
    if (!cond)
        fail(code, what);
}

} // namespace mbsdao
