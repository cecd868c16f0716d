#include "omega_forge/cover.hpp"

#include <algorithm>
#include <set>

namespace omega_forge::cover {

std::optional<Witness> covered(uint64_t h, const construct::PrimeBank& bank, unsigned smax) {
    const auto& ps = bank.primes;
    const unsigned s_top = std::min<unsigned>(smax, static_cast<unsigned>(ps.size()));
    for (unsigned s = 1; s <= s_top; ++s) {
        Witness w;
        w.size = s;
        for (unsigned t = 1; t <= ps.size() && w.indices.size() < s; ++t)
            if (h % ps[t - 1] == s - 1)
                w.indices.push_back(t);
        if (w.indices.size() == s)
            return w;
    }
    return std::nullopt;
}

unsigned pigeonhole_count(uint64_t h, const construct::PrimeBank& bank, unsigned smax) {
    unsigned count = 0;
    for (uint64_t p : bank.primes)
        if (h % p < smax)
            ++count;
    return count;
}

ExceptionalSet exceptional_set(const construct::PrimeBank& bank, unsigned smax,
                               uint64_t h_max) {
    ExceptionalSet ex;
    ex.label = bank.label.str();
    ex.h_max = h_max;
    for (uint64_t h = 0; h <= h_max; ++h)
        if (!covered(h, bank, smax))
            ex.members.push_back(h);
    return ex;
}

ExceptionalSet union_exceptional(const std::vector<ExceptionalSet>& sets) {
    ExceptionalSet u;
    u.label = "global";
    std::set<uint64_t> members;
    for (const auto& s : sets) {
        u.h_max = std::max(u.h_max, s.h_max);
        members.insert(s.members.begin(), s.members.end());
    }
    u.members.assign(members.begin(), members.end());
    return u;
}

DensityReport density_report(const std::vector<construct::PrimeBank>& banks, unsigned smax,
                             uint64_t h_max) {
    DensityReport report;
    for (const auto& bank : banks) {
        DensityRow row;
        row.label = bank.label.str();
        row.bank_size = bank.primes.size();
        row.product_value = bank.product_value;
        row.density = exceptional_set(bank, smax, h_max).density();
        report.rows.push_back(row);
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        return a.product_value < b.product_value;
    });
    for (size_t i = 1; i < report.rows.size(); ++i)
        if (report.rows[i].density > report.rows[i - 1].density)
            report.nonincreasing = false;
    return report;
}

} // namespace omega_forge::cover
