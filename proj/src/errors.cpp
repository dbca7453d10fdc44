#include "mbsdao/errors.hpp"

namespace mbsdao {

const char* to_string(Err e) {
    switch (e) {
    case Err::SupplyExceeded: return "SupplyExceeded";
    case Err::UnknownClass: return "UnknownClass";
    case Err::UnknownAccount: return "UnknownAccount";
    case Err::UnknownToken: return "UnknownToken";
    case Err::NotOwner: return "NotOwner";
    case Err::InsufficientFunds: return "InsufficientFunds";
    case Err::TokenLocked: return "TokenLocked";
    case Err::WeightsInvalid: return "WeightsInvalid";
    case Err::DuplicateParcel: return "DuplicateParcel";
    case Err::Encumbered: return "Encumbered";
    case Err::AlreadyEncumbered: return "AlreadyEncumbered";
    case Err::NotLienholder: return "NotLienholder";
    case Err::EventOutOfOrder: return "EventOutOfOrder";
    case Err::NotAdjustable: return "NotAdjustable";
    case Err::NotResetBoundary: return "NotResetBoundary";
    case Err::SeizeWithoutDefault: return "SeizeWithoutDefault";
    case Err::TitleEncumbered: return "TitleEncumbered";
    case Err::LenderUnderfunded: return "LenderUnderfunded";
    case Err::NotInDefault: return "NotInDefault";
    case Err::VoteNotPassed: return "VoteNotPassed";
    case Err::Overpayment: return "Overpayment";
    case Err::AlreadyPooled: return "AlreadyPooled";
    case Err::EmptyPool: return "EmptyPool";
    case Err::EmptySeed: return "EmptySeed";
    case Err::NotTokenholder: return "NotTokenholder";
    case Err::VotingClosed: return "VotingClosed";
    case Err::NotPassed: return "NotPassed";
    case Err::AlreadyExecuted: return "AlreadyExecuted";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::ConfigInvalid: return "ConfigInvalid";
    case Err::InvariantViolated: return "InvariantViolated";
    case Err::IoError: return "IoError";
    case Err::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace mbsdao
