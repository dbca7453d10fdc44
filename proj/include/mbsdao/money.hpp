#pragma once

// Integer money and fixed-point rates.
//
// All cash amounts are minor units (cents) of the single stable accounting
// unit. There is no floating-point money anywhere: rates are carried as
// 1e-9 fixed point and every product is computed through 128-bit integer
// arithmetic with round-half-up, so conservation checks hold exactly and
// runs are bit-reproducible.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mbsdao {

using Money = std::int64_t;

// Annual interest rate (or any unit fraction) at 1e-9 resolution.
struct Rate {
    static constexpr std::int64_t scale = 1'000'000'000;

    std::int64_t nano = 0;

    static Rate from_double(double r);
    static Rate from_nano(std::int64_t n) { return Rate{n}; }
    double to_double() const { return static_cast<double>(nano) / scale; }

    Rate operator+(Rate o) const { return Rate{nano + o.nano}; }
    Rate operator-(Rate o) const { return Rate{nano - o.nano}; }
    auto operator<=>(const Rate&) const = default;
};

// round-half-up of a*num/den. Requires a, num >= 0 and den > 0.
Money mul_div_half_up(Money a, std::int64_t num, std::int64_t den);

// One period of interest on `balance`: balance * rate / periods_per_year,
// rounded half-up to the minor unit.
Money period_interest(Money balance, Rate annual_rate, int periods_per_year);

// Fraction of an amount (e.g. a royalty), rounded half-up.
Money fraction_of(Money amount, Rate fraction);

// Splits `total` across `weights` proportionally: floor shares first, then
// leftover units one-by-one by largest remainder, ties to the lowest index.
// The result sums to `total` exactly. Requires total >= 0, all weights >= 0,
// and at least one positive weight.
std::vector<Money> allocate_largest_remainder(Money total, std::span<const std::int64_t> weights);

// "1234" minor units -> "12.34"; negative amounts keep the sign.
std::string format_money(Money m);

// "12.34" -> 1234 minor units. Accepts an optional sign and up to two
// decimals. Throws Err::InvalidArgument on malformed input.
Money parse_money(const std::string& s);

} // namespace mbsdao
