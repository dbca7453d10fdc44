#pragma once

#include "doctest.h"
#include "mbsdao/errors.hpp"

// Asserts that `expr` throws mbsdao::Error with the given code.
#define CHECK_ERR(expr, err)                                                                       \
    do {                                                                                           \
        try {                                                                                      \
            (void)(expr);                                                                          \
            FAIL_CHECK("expected " << mbsdao::to_string(err) << ", no error thrown");              \
        } catch (const mbsdao::Error& e_) {                                                        \
            CHECK_MESSAGE(e_.code() == (err), e_.what());                                          \
        }                                                                                          \
    } while (0)
