#include "omega_forge/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

namespace omega_forge::harness {

using nlohmann::ordered_json;

double report_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

std::vector<Int> members_in_window(const construct::Construction& c, const Int& x0,
                                   const Int& x1, size_t max_count) {
    if (x0 > x1)
        throw DomainError("members_in_window: x0 > x1");
    const Int& W = c.modulus;
    const Int& b = c.residue;
    // first n >= x0 with n == b (mod W)
    Int delta = x0 - b;
    Int steps = 0;
    if (delta > 0) {
        steps = delta / W;
        if (steps * W < delta)
            steps += 1;
    }
    std::vector<Int> members;
    for (Int n = b + steps * W; n <= x1 && members.size() < max_count; n += W)
        if (n >= x0)
            members.push_back(n);
    if (members.empty())
        throw EmptyWindow("members_in_window: no n == b (mod W) in [" + x0.get_str() + ", " +
                          x1.get_str() + "]");
    return members;
}

namespace {

// value of n j + a^h k modulo q, without materializing a^h
bool q_divides_value(const Int& n, int j, int k, uint64_t h, int a, const Int& q) {
    Int pw = ntcore::powm(Int(a), Int(static_cast<unsigned long>(h)), q);
    Int val = ((n % q) * j + pw * k) % q;
    return val == 0;
}

int family_copies(const construct::Construction& c, int a, int j, int k) {
    int max_l = 0;
    for (const auto& bank : c.banks)
        if (bank.label.a == a && bank.label.j == j && bank.label.k == k)
            max_l = std::max(max_l, bank.label.l);
    return max_l;
}

} // namespace

std::vector<WitnessHit> guarantee_witnesses(const Int& n, int a, int j, int k, uint64_t h,
                                            const construct::Construction& c) {
    std::vector<WitnessHit> hits;
    int copies = family_copies(c, a, j, k);
    for (int l = 1; l <= copies; ++l) {
        construct::Label label{a, j, k, l};
        const construct::PrimeBank* bank = c.bank_for(label);
        if (!bank)
            continue;
        auto w = cover::covered(h, *bank, c.params.smax);
        if (!w)
            continue;
        const construct::CoverEntry* entry = nullptr;
        for (const auto* e : c.entries_for(label))
            if (e->index_set == w->indices) {
                entry = e;
                break;
            }
        if (!entry)
            throw ConstructionConflict("guarantee_witnesses: witness subset has no entry for " +
                                       label.str());
        if (!q_divides_value(n, j, k, h, a, entry->q))
            throw DivisibilityViolation("witness q = " + entry->q.get_str() +
                                        " does not divide n j + a^h k at n = " + n.get_str() +
                                        ", h = " + std::to_string(h));
        hits.push_back({l, w->indices, entry->q});
    }
    return hits;
}

namespace {

// exact value materialized only when it can be small: a^h <= 4 n |j k|
bool maybe_small_value(const Int& n, int j, int k, uint64_t h, int a, Int& value_out) {
    Int bound = n * j * (k < 0 ? -k : k) * 4;
    double bits = static_cast<double>(h) * std::log2(static_cast<double>(a));
    if (bits > static_cast<double>(mpz_sizeinbase(bound.get_mpz_t(), 2)) + 1)
        return false;
    value_out = n * j + ntcore::pow_ui(Int(a), h) * k;
    return true;
}

// omega(value) vs L, within budget. 1 = below L, 0 = at least L, -1 = unknown
int omega_below_level(const Int& value, int L, const Caps& caps) {
    Int v = abs(value);
    if (v == 0)
        return 1;
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > caps.max_factor_bits)
        return -1;
    auto f = ntcore::factorize(v, caps.factor_budget);
    if (static_cast<int>(f.entries.size()) >= L)
        return 0;
    if (!f.complete)
        return -1; // cofactor could still hide enough primes
    return static_cast<int>(f.entries.size()) < L ? 1 : 0;
}

std::vector<uint64_t> sample_without_replacement(const std::vector<uint64_t>& pool,
                                                 size_t count, uint64_t seed) {
    if (pool.size() <= count)
        return pool;
    std::vector<uint64_t> items = pool;
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates, index arithmetic only (portable determinism)
    for (size_t i = 0; i < count; ++i) {
        size_t pick = i + static_cast<size_t>(rng() % (items.size() - i));
        std::swap(items[i], items[pick]);
    }
    items.resize(count);
    std::sort(items.begin(), items.end());
    return items;
}

cover::ExceptionalSet global_exceptional(const construct::Construction& c, uint64_t h_max) {
    std::vector<cover::ExceptionalSet> sets;
    for (const auto& bank : c.banks)
        sets.push_back(cover::exceptional_set(bank, c.params.smax, h_max));
    return cover::union_exceptional(sets);
}

} // namespace

VerificationReport verify_guarantee(const construct::Construction& c, const Int& x0,
                                    const Int& x1, uint64_t h_max, const Caps& caps) {
    VerificationReport report;
    report.construction_hash = construction_hash(c);
    report.x0 = x0;
    report.x1 = x1;
    report.h_max = h_max;
    report.seed = caps.seed;

    auto members = members_in_window(c, x0, x1, caps.max_members);
    for (const auto& n : members)
        report.members.push_back(n.get_str());

    auto global_ex = global_exceptional(c, h_max);
    report.exceptional_h_count = global_ex.members.size();
    std::set<uint64_t> exceptional(global_ex.members.begin(), global_ex.members.end());

    for (const auto& [fam, L] : c.families()) {
        FamilyOutcome outcome;
        outcome.a = fam.a;
        outcome.j = fam.j;
        outcome.k = fam.k;
        for (uint64_t h = 0; h <= h_max; ++h) {
            if (exceptional.count(h))
                continue;
            for (const auto& n : members) {
                ++outcome.checked;
                try {
                    auto hits = guarantee_witnesses(n, fam.a, fam.j, fam.k, h, c);
                    std::set<Int> distinct;
                    for (const auto& hit : hits)
                        distinct.insert(hit.q);
                    if (distinct.size() != hits.size())
                        throw DistinctnessViolation("witness primes repeat across copies");
                    if (static_cast<int>(hits.size()) < L)
                        throw Error("only " + std::to_string(hits.size()) + " witnesses, need " +
                                    std::to_string(L));
                    Int value;
                    if (maybe_small_value(n, fam.j, fam.k, h, fam.a, value)) {
                        if (value == 0)
                            throw Error("n j + a^h k = 0");
                        Int v = abs(value);
                        if (mpz_sizeinbase(v.get_mpz_t(), 2) <= 64) {
                            ++report.cross_checked;
                            if (static_cast<int>(ntcore::omega(v)) < L)
                                throw Error("full factorization shows omega < L");
                        }
                    }
                    ++outcome.passed;
                } catch (const Error& err) {
                    outcome.failed.push_back(
                        {n.get_str(), h, fam.a, fam.j, fam.k, err.what()});
                }
            }
        }
        report.families.push_back(std::move(outcome));
    }
    report.pass = true;
    for (const auto& f : report.families)
        if (!f.failed.empty())
            report.pass = false;
    return report;
}

ExceptionalStats empirical_exceptional(const construct::Construction& c, const Int& x0,
                                       const Int& x1, uint64_t h_max, const Caps& caps) {
    ExceptionalStats stats;
    stats.seed = caps.seed;
    auto members = members_in_window(c, x0, x1, caps.max_members);
    auto global_ex = global_exceptional(c, h_max);
    auto sampled = sample_without_replacement(global_ex.members, caps.max_exceptional_h,
                                              caps.seed);
    stats.sampled_h = sampled.size();
    for (const auto& [fam, L] : c.families()) {
        for (uint64_t h : sampled) {
            for (const auto& n : members) {
                ++stats.checked;
                Int value;
                if (!maybe_small_value(n, fam.j, fam.k, h, fam.a, value)) {
                    // |value| >= a^h / 2, far past the factoring range
                    double bits =
                        static_cast<double>(h) * std::log2(static_cast<double>(fam.a));
                    if (bits > caps.max_factor_bits) {
                        ++stats.undetermined;
                        continue;
                    }
                    value = n * fam.j + ntcore::pow_ui(Int(fam.a), h) * fam.k;
                }
                int verdict = omega_below_level(value, L, caps);
                if (verdict < 0)
                    ++stats.undetermined;
                else if (verdict == 1)
                    ++stats.below_level;
                else
                    ++stats.at_least_level;
            }
        }
    }
    uint64_t determined = stats.below_level + stats.at_least_level;
    stats.fraction_below =
        determined == 0 ? 0.0 : static_cast<double>(stats.below_level) / determined;
    return stats;
}

ScanResult theorem_scan(const construct::Construction& c, const Int& x0, const Int& x1,
                        uint64_t h_max, const Caps& caps) {
    ScanResult result;
    auto members = members_in_window(c, x0, x1, caps.max_members);
    result.members = members.size();
    auto global_ex = global_exceptional(c, h_max);
    std::set<uint64_t> exceptional(global_ex.members.begin(), global_ex.members.end());
    auto families = c.families();

    for (const auto& n : members) {
        bool good = true, undetermined = false;
        for (const auto& [fam, L] : families) {
            for (uint64_t h = 0; h <= h_max && good; ++h) {
                if (!exceptional.count(h)) {
                    auto hits = guarantee_witnesses(n, fam.a, fam.j, fam.k, h, c);
                    if (static_cast<int>(hits.size()) < L)
                        good = false;
                    continue;
                }
                Int value;
                if (!maybe_small_value(n, fam.j, fam.k, h, fam.a, value)) {
                    double bits =
                        static_cast<double>(h) * std::log2(static_cast<double>(fam.a));
                    if (bits > caps.max_factor_bits) {
                        undetermined = true;
                        continue;
                    }
                    value = n * fam.j + ntcore::pow_ui(Int(fam.a), h) * fam.k;
                }
                int verdict = omega_below_level(value, L, caps);
                if (verdict < 0)
                    undetermined = true;
                else if (verdict == 1)
                    good = false;
            }
            if (!good)
                break;
        }
        if (!good)
            ++result.bad;
        else if (undetermined)
            ++result.undetermined;
        else
            ++result.good;
    }
    uint64_t determined = result.good + result.bad;
    result.good_fraction =
        determined == 0 ? 0.0 : static_cast<double>(result.good) / determined;
    return result;
}

std::string construction_hash(const construct::Construction& c) {
    std::string dump = construct::to_json(c).dump();
    uint64_t h = 1469598103934665603ull; // FNV-1a
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

ordered_json report_to_json(const VerificationReport& r, const ExceptionalStats& stats,
                            const ScanResult* scan) {
    ordered_json j;
    j["construction_hash"] = r.construction_hash;
    j["window"] = {r.x0.get_str(), r.x1.get_str()};
    j["hmax"] = r.h_max;
    ordered_json fams = ordered_json::array();
    for (const auto& f : r.families) {
        ordered_json fj;
        fj["a"] = f.a;
        fj["j"] = f.j;
        fj["k"] = f.k;
        fj["checked"] = f.checked;
        fj["passed"] = f.passed;
        ordered_json failed = ordered_json::array();
        for (const auto& t : f.failed)
            failed.push_back(ordered_json{
                {"n", t.n}, {"h", t.h}, {"reason", t.reason}});
        fj["failed"] = failed;
        fams.push_back(fj);
    }
    j["families"] = fams;
    j["members"] = r.members;
    j["exceptional_h_count"] = r.exceptional_h_count;
    j["cross_checked"] = r.cross_checked;
    j["exceptional_stats"] = ordered_json{
        {"sampled_h", stats.sampled_h},
        {"checked", stats.checked},
        {"below_level", stats.below_level},
        {"at_least_level", stats.at_least_level},
        {"undetermined", stats.undetermined},
        {"fraction_below", report_real(stats.fraction_below)}};
    if (scan) {
        j["good_fraction"] = report_real(scan->good_fraction);
        j["scan"] = ordered_json{{"members", scan->members},
                                 {"good", scan->good},
                                 {"bad", scan->bad},
                                 {"undetermined", scan->undetermined}};
    }
    j["verdict"] = r.pass ? "PASS" : "FAIL";
    j["seed"] = r.seed;
    j["versions"] = ordered_json{{"tool", construct::kToolVersion}};
    return j;
}

void emit_report(const ordered_json& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("emit_report: cannot open " + path);
    out << report.dump(2) << "\n";
    if (!out)
        throw Error("emit_report: write failure on " + path);
}

construct::Params reference_micro_params() {
    construct::Params p;
    p.mode = construct::Mode::scaled;
    p.K = 2;
    p.L = 2;
    p.smax = 2;
    p.h_max = 300000;
    construct::BankSpec b1, b2, b3, b4;
    b1.primes = {3, 11};
    b2.primes = {5, 7};
    b3.primes = {13};
    b4.primes = {17};
    p.labels = {
        {{2, 1, 1, 1}, b1},
        {{2, 1, 1, 2}, b2},
        {{2, 1, -1, 1}, b3},
        {{2, 1, -1, 2}, b4},
    };
    return p;
}

construct::Construction reference_micro_construction() {
    return construct::build(reference_micro_params());
}

} // namespace omega_forge::harness
