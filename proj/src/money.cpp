#include "mbsdao/money.hpp"

#include "mbsdao/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace mbsdao {

Rate Rate::from_double(double r) {
    return Rate{static_cast<std::int64_t>(std::llround(r * scale))};
}

Money mul_div_half_up(Money a, std::int64_t num, std::int64_t den) {
    require(a >= 0 && num >= 0 && den > 0, Err::InvalidArgument, "mul_div_half_up operands");
    __int128 p = static_cast<__int128>(a) * num;
    return static_cast<Money>((p + den / 2) / den);
}

Money period_interest(Money balance, Rate annual_rate, int periods_per_year) {
    require(periods_per_year > 0, Err::InvalidArgument, "periods_per_year");
    return mul_div_half_up(balance, annual_rate.nano,
                           Rate::scale * static_cast<std::int64_t>(periods_per_year));
}

Money fraction_of(Money amount, Rate fraction) {
    return mul_div_half_up(amount, fraction.nano, Rate::scale);
}

std::vector<Money> allocate_largest_remainder(Money total,
                                              std::span<const std::int64_t> weights) {
    require(total >= 0, Err::InvalidArgument, "allocation total must be non-negative");
    __int128 w_sum = 0;
    for (auto w : weights) {
        require(w >= 0, Err::InvalidArgument, "allocation weight must be non-negative");
        w_sum += w;
    }
    require(w_sum > 0, Err::InvalidArgument, "allocation needs a positive weight");

    const std::size_t n = weights.size();
    std::vector<Money> out(n, 0);
    std::vector<std::pair<__int128, std::size_t>> remainders;
    remainders.reserve(n);
    Money assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        __int128 p = static_cast<__int128>(total) * weights[i];
        out[i] = static_cast<Money>(p / w_sum);
        assigned += out[i];
        remainders.emplace_back(p % w_sum, i);
    }
    Money leftover = total - assigned;
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    for (Money k = 0; k < leftover; ++k)
        out[remainders[static_cast<std::size_t>(k)].second] += 1;
    return out;
}

std::string format_money(Money m) {
    bool neg = m < 0;
    unsigned long long v = neg ? static_cast<unsigned long long>(-(m + 1)) + 1ULL
                               : static_cast<unsigned long long>(m);
    unsigned long long whole = v / 100, cents = v % 100;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s%llu.%02llu", neg ? "-" : "", whole, cents);
    return buf;
}

Money parse_money(const std::string& s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    require(i < s.size(), Err::InvalidArgument, "empty money literal: '" + s + "'");
    unsigned long long whole = 0;
    bool any = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        whole = whole * 10 + static_cast<unsigned long long>(s[i] - '0');
        any = true;
        ++i;
    }
    unsigned long long cents = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        int digits = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) && digits < 2) {
            cents = cents * 10 + static_cast<unsigned long long>(s[i] - '0');
            ++digits;
            ++i;
            any = true;
        }
        if (digits == 1)
            cents *= 10;
    }
    require(any && i == s.size(), Err::InvalidArgument, "malformed money literal: '" + s + "'");
    Money m = static_cast<Money>(whole * 100 + cents);
    return neg ? -m : m;
}

} // namespace mbsdao
