#include "omega_forge/construct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

namespace omega_forge::construct {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Label::str() const {
    return "(" + std::to_string(a) + "," + std::to_string(j) + "," + std::to_string(k) + "," +
           std::to_string(l) + ")";
}

DerivedParams derive_params(const Params& p) {
    if (p.mode != Mode::paper_faithful)
        throw ConfigError("derive_params: only meaningful in paper-faithful mode");
    if (p.x < 20)
        throw ConfigError("derive_params: x too small for log log log x");
    DerivedParams d;
    double lllx = std::log(std::log(std::log(p.x)));
    d.L = std::floor(std::pow(lllx, 1.0 / 3.0 - p.epsilon)) + 1.0;
    d.log_q = std::pow(std::log(std::log(p.x)), 1.0 - p.epsilon);
    d.M = std::floor(16.0 * p.K * p.K) + 1.0;
    return d;
}

IntervalSchedule interval_schedule(const Params& p, int a) {
    if (a < 2 || a > p.K)
        throw ConfigError("interval_schedule: a out of range");
    DerivedParams d = derive_params(p);
    double ML = d.M * d.L;
    double K2L = static_cast<double>(p.K) * p.K * d.L;
    IntervalSchedule s;
    if (a == 2) {
        s.exp_lo = 4.0 / ML;
        s.exp_hi = (4.0 + 4.0 * K2L) / ML;
    } else {
        s.exp_lo = (5.0 + 8.0 * (a - 1) * K2L) / ML;
        s.exp_hi = (4.0 + 8.0 * a * K2L) / ML;
    }
    s.log_lo = std::pow(d.log_q, s.exp_lo);
    s.log_hi = std::pow(d.log_q, s.exp_hi);
    // infeasible when the interval cannot be enumerated, or cannot plausibly
    // host the T_r >= (2ML^2)^2 primes the construction needs
    double need = std::pow(2.0 * d.M * d.L * d.L, 2.0);
    if (s.log_hi > std::log(static_cast<double>(ntcore::kSievePrimesLimit))) {
        s.infeasible = true;
    } else {
        double approx = std::exp(s.log_hi) / s.log_hi - std::exp(s.log_lo) / s.log_lo;
        s.infeasible = approx < need;
    }
    return s;
}

PrimeBank select_prime_bank(const Label& label, uint64_t lo, uint64_t hi,
                            const std::vector<CoverEntry>& forbidden, double target_lo,
                            double target_hi, std::set<uint64_t>& used) {
    if (lo > hi)
        throw DomainError("select_prime_bank: empty interval");
    if (target_lo > target_hi)
        throw DomainError("select_prime_bank: empty target");
    PrimeBank bank;
    bank.label = label;
    auto primes = ntcore::sieve_primes(hi);
    for (uint64_t p : primes) {
        if (p < lo)
            continue;
        if (used.count(p))
            continue;
        // the p | w_a test, divisor by divisor: w_a = prod (q' - 1)
        bool divides_wa = false;
        for (const auto& e : forbidden) {
            if (mpz_divisible_ui_p(Int(e.q - 1).get_mpz_t(), p)) {
                divides_wa = true;
                break;
            }
        }
        if (divides_wa)
            continue;
        bank.primes.push_back(p);
        bank.product_value *= static_cast<double>(p) / (static_cast<double>(p) - 1.0);
        if (bank.product_value >= target_lo) {
            if (bank.product_value > target_hi)
                throw TargetOvershoot("select_prime_bank: product " +
                                      std::to_string(bank.product_value) + " past target");
            for (uint64_t q : bank.primes)
                used.insert(q);
            return bank;
        }
    }
    throw InsufficientPrimes("select_prime_bank: interval [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] exhausted below target");
}

std::vector<CoverEntry> build_cover_entries(const PrimeBank& bank, int a, unsigned smax,
                                            bool skip_no_primitive,
                                            const ntcore::FactorBudget& budget) {
    if (smax < 1)
        throw DomainError("build_cover_entries: smax < 1");
    const size_t T = bank.primes.size();
    const unsigned s_top = std::min<unsigned>(smax, static_cast<unsigned>(T));
    std::vector<CoverEntry> entries;
    std::vector<unsigned> idx;
    auto emit = [&](const std::vector<unsigned>& I) {
        uint64_t m = 1;
        for (unsigned t : I) {
            uint64_t p = bank.primes[t - 1];
            if (m > UINT64_MAX / p)
                throw BudgetExceeded("build_cover_entries: subset product overflows");
            m *= p;
        }
        CoverEntry e;
        e.label = bank.label;
        e.index_set = I;
        e.m = Int(static_cast<unsigned long>(m));
        e.target_exponent = static_cast<unsigned>(I.size()) - 1;
        try {
            e.q = ntcore::primitive_prime_factor(Int(a), m, budget);
        } catch (const NoPrimitivePrime&) {
            if (skip_no_primitive)
                return;
            throw;
        }
        entries.push_back(std::move(e));
    };
    // subsets by size, then lexicographically: deterministic entry order
    for (unsigned s = 1; s <= s_top; ++s) {
        idx.assign(s, 0);
        for (unsigned i = 0; i < s; ++i)
            idx[i] = i + 1;
        while (true) {
            emit(idx);
            // next combination of {1..T} choose s
            int i = static_cast<int>(s) - 1;
            while (i >= 0 && idx[i] == T - (s - 1 - i))
                --i;
            if (i < 0)
                break;
            ++idx[i];
            for (unsigned j = i + 1; j < s; ++j)
                idx[j] = idx[j - 1] + 1;
        }
    }
    return entries;
}

LabelResult assemble_label(const std::vector<CoverEntry>& entries, int j, int k, int a) {
    if (entries.empty())
        throw ConstructionConflict("assemble_label: no entries");
    ntcore::CrtSystem sys;
    Int W_r = 1;
    std::set<Int> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.q).second)
            throw ConstructionConflict("assemble_label: duplicate q = " + e.q.get_str());
        if (ntcore::gcd(e.q, Int(j)) != 1)
            throw ConstructionConflict("assemble_label: q | j at q = " + e.q.get_str());
        // b_r == -k a^{|I|-1} j^{-1} (mod q)
        Int pw = ntcore::powm(Int(a), Int(static_cast<unsigned long>(e.target_exponent)), e.q);
        Int res = (-Int(k) * pw % e.q * ntcore::invert(Int(j) % e.q, e.q)) % e.q;
        if (res < 0)
            res += e.q;
        sys.congruences.push_back({res, e.q});
        W_r *= e.q;
    }
    auto [b_r, mod] = ntcore::crt(sys);
    LabelResult lr;
    lr.label = entries.front().label;
    lr.label.j = j;
    lr.label.k = k;
    lr.modulus = mod;
    lr.residue = b_r;
    if (mod != W_r)
        throw ConstructionConflict("assemble_label: modulus mismatch");
    return lr;
}

const PrimeBank* Construction::bank_for(const Label& l) const {
    for (const auto& b : banks)
        if (b.label == l)
            return &b;
    return nullptr;
}

std::vector<const CoverEntry*> Construction::entries_for(const Label& l) const {
    std::vector<const CoverEntry*> out;
    for (const auto& e : entries)
        if (e.label == l)
            out.push_back(&e);
    return out;
}

std::vector<std::pair<Label, int>> Construction::families() const {
    std::map<std::tuple<int, int, int>, int> fams;
    for (const auto& b : banks) {
        auto key = std::make_tuple(b.label.a, b.label.j, b.label.k);
        fams[key] = std::max(fams[key], b.label.l);
    }
    std::vector<std::pair<Label, int>> out;
    for (const auto& [key, maxl] : fams) {
        Label lab;
        lab.a = std::get<0>(key);
        lab.j = std::get<1>(key);
        lab.k = std::get<2>(key);
        lab.l = 1;
        out.push_back({lab, maxl});
    }
    return out;
}

void Construction::validate() const {
    // banks: ascending primes above smax, globally distinct
    std::set<uint64_t> all_primes;
    for (const auto& bank : banks) {
        uint64_t prev = 0;
        for (uint64_t p : bank.primes) {
            if (p <= params.smax)
                throw ConstructionConflict("validate: bank prime " + std::to_string(p) +
                                           " <= smax");
            if (p <= prev)
                throw ConstructionConflict("validate: bank primes not ascending");
            if (!all_primes.insert(p).second)
                throw ConstructionConflict("validate: prime " + std::to_string(p) +
                                           " shared across banks");
            prev = p;
        }
    }

    // entries: distinct q of exact order m with m | q - 1 and q > K
    std::set<Int> qs;
    for (const auto& e : entries) {
        if (!qs.insert(e.q).second)
            throw DistinctnessViolation("validate: duplicate q = " + e.q.get_str());
        if (e.q <= params.K)
            throw ConstructionConflict("validate: q <= K at q = " + e.q.get_str());
        const PrimeBank* bank = bank_for(e.label);
        if (!bank)
            throw ConstructionConflict("validate: entry without bank " + e.label.str());
        Int m = 1;
        for (unsigned t : e.index_set) {
            if (t < 1 || t > bank->primes.size())
                throw ConstructionConflict("validate: index out of bank range");
            m *= Int(static_cast<unsigned long>(bank->primes[t - 1]));
        }
        if (m != e.m)
            throw ConstructionConflict("validate: m mismatch for " + e.label.str());
        if (e.target_exponent + 1 != e.index_set.size())
            throw ConstructionConflict("validate: target_exponent mismatch");
        if (!mpz_divisible_p(Int(e.q - 1).get_mpz_t(), m.get_mpz_t()))
            throw ConstructionConflict("validate: m does not divide q - 1");
        Int a(e.label.a);
        if (ntcore::powm(a, m, e.q) != 1)
            throw ConstructionConflict("validate: a^m != 1 mod q");
        for (unsigned t : e.index_set)
            if (ntcore::powm(a, m / Int(static_cast<unsigned long>(bank->primes[t - 1])), e.q) == 1)
                throw ConstructionConflict("validate: order of a mod q below m");
    }

    // cross-stage w_a guarantee: bank primes at stage a never divide q' - 1
    // for entries of strictly earlier stages
    for (const auto& bank : banks)
        for (const auto& e : entries)
            if (e.label.a < bank.label.a)
                for (uint64_t p : bank.primes)
                    if (mpz_divisible_ui_p(Int(e.q - 1).get_mpz_t(), p))
                        throw ConstructionConflict("validate: stage-" +
                                                   std::to_string(bank.label.a) + " prime " +
                                                   std::to_string(p) + " divides q' - 1");

    // per-label congruences and the global assembly
    Int w_check = 1;
    for (const auto& lr : per_label) {
        Int wr_check = 1;
        for (const auto* e : entries_for(lr.label)) {
            wr_check *= e->q;
            Int a(lr.label.a);
            Int val = lr.residue * lr.label.j +
                      ntcore::pow_ui(a, e->target_exponent) * lr.label.k;
            if (val % e->q != 0)
                throw ConstructionConflict("validate: b_r j + a^{|I|-1} k != 0 mod q for " +
                                           lr.label.str());
        }
        if (wr_check != lr.modulus)
            throw ConstructionConflict("validate: W_r mismatch for " + lr.label.str());
        if (residue % lr.modulus != lr.residue)
            throw CrtConflict("validate: b != b_r mod W_r for " + lr.label.str());
        w_check *= lr.modulus;
    }
    if (w_check != modulus)
        throw ConstructionConflict("validate: W is not the product of the W_r");
    if (residue < 0 || residue >= modulus)
        throw ConstructionConflict("validate: b out of range");
    if (gcd_wb != ntcore::gcd(modulus, residue))
        throw ConstructionConflict("validate: stale gcd(W, b)");
}

Construction assemble_global(const Params& params, std::vector<PrimeBank> banks,
                             std::vector<CoverEntry> entries,
                             std::vector<LabelResult> per_label) {
    Construction c;
    c.params = params;
    c.banks = std::move(banks);
    c.entries = std::move(entries);
    c.per_label = std::move(per_label);
    ntcore::CrtSystem sys;
    c.modulus = 1;
    for (const auto& lr : c.per_label) {
        sys.congruences.push_back({lr.residue, lr.modulus});
        c.modulus *= lr.modulus;
    }
    auto [b, mod] = ntcore::crt(sys);
    if (mod != c.modulus)
        throw DistinctnessViolation("assemble_global: per-label moduli not coprime");
    c.residue = b;
    c.gcd_wb = ntcore::gcd(c.modulus, c.residue);
    c.validate();
    return c;
}

Construction build(const Params& params) {
    if (params.mode != Mode::scaled)
        throw ConfigError("build: paper-faithful schedules are log-space only; "
                          "use interval_schedule");
    if (params.labels.empty())
        throw ConfigError("build: no labels configured");

    auto labels = params.labels;
    std::sort(labels.begin(), labels.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    std::set<uint64_t> used;
    std::vector<PrimeBank> banks;
    std::vector<CoverEntry> entries;
    std::vector<CoverEntry> earlier_stage_entries;
    std::vector<LabelResult> per_label;

    size_t i = 0;
    while (i < labels.size()) {
        int stage_a = labels[i].first.a;
        std::vector<CoverEntry> stage_entries;
        for (; i < labels.size() && labels[i].first.a == stage_a; ++i) {
            const auto& [label, spec] = labels[i];
            PrimeBank bank;
            if (!spec.primes.empty()) {
                bank.label = label;
                bank.primes = spec.primes;
                std::sort(bank.primes.begin(), bank.primes.end());
                for (uint64_t p : bank.primes) {
                    if (!ntcore::is_prime(Int(static_cast<unsigned long>(p))))
                        throw ConfigError("build: " + std::to_string(p) + " is not prime");
                    if (!used.insert(p).second)
                        throw ConstructionConflict("build: prime " + std::to_string(p) +
                                                   " already used");
                    bank.product_value *=
                        static_cast<double>(p) / (static_cast<double>(p) - 1.0);
                }
                if (spec.target &&
                    (bank.product_value < spec.target->first ||
                     bank.product_value > spec.target->second))
                    throw ConstructionConflict("build: explicit bank misses its target");
            } else if (spec.interval) {
                auto [lo, hi] = *spec.interval;
                auto [tlo, thi] = spec.target.value_or(std::make_pair(1.0, 1e300));
                bank = select_prime_bank(label, lo, hi, earlier_stage_entries, tlo, thi, used);
            } else {
                throw ConfigError("build: label " + label.str() +
                                  " has neither primes nor interval");
            }
            auto bank_entries = build_cover_entries(bank, label.a, params.smax,
                                                    params.skip_no_primitive);
            per_label.push_back(assemble_label(bank_entries, label.j, label.k, label.a));
            banks.push_back(std::move(bank));
            for (auto& e : bank_entries)
                stage_entries.push_back(std::move(e));
        }
        for (auto& e : stage_entries) {
            earlier_stage_entries.push_back(e);
            entries.push_back(std::move(e));
        }
    }
    return assemble_global(params, std::move(banks), std::move(entries), std::move(per_label));
}

namespace {

ordered_json label_to_json(const Label& l) {
    return ordered_json{{"a", l.a}, {"j", l.j}, {"k", l.k}, {"l", l.l}};
}

Label label_from_json(const json& j) {
    Label l;
    l.a = j.at("a").get<int>();
    l.j = j.at("j").get<int>();
    l.k = j.at("k").get<int>();
    l.l = j.at("l").get<int>();
    return l;
}

} // namespace

nlohmann::ordered_json params_to_json(const Params& p) {
    ordered_json j;
    j["mode"] = p.mode == Mode::scaled ? "scaled" : "paper_faithful";
    j["K"] = p.K;
    j["epsilon"] = p.epsilon;
    if (p.mode == Mode::paper_faithful)
        j["x"] = p.x;
    j["L"] = p.L;
    j["smax"] = p.smax;
    j["h_max"] = p.h_max;
    j["skip_no_primitive"] = p.skip_no_primitive;
    ordered_json labels = ordered_json::array();
    for (const auto& [label, spec] : p.labels) {
        ordered_json e = label_to_json(label);
        if (!spec.primes.empty())
            e["primes"] = spec.primes;
        if (spec.interval)
            e["interval"] = {spec.interval->first, spec.interval->second};
        if (spec.target)
            e["target"] = {spec.target->first, spec.target->second};
        labels.push_back(e);
    }
    j["labels"] = labels;
    return j;
}

Params params_from_json(const json& j) {
    Params p;
    try {
        std::string mode = j.at("mode").get<std::string>();
        if (mode == "scaled")
            p.mode = Mode::scaled;
        else if (mode == "paper_faithful")
            p.mode = Mode::paper_faithful;
        else
            throw ConfigError("params: unknown mode " + mode);
        p.K = j.value("K", 2);
        p.epsilon = j.value("epsilon", 0.1);
        p.x = j.value("x", 0.0);
        p.L = j.value("L", 1);
        p.smax = j.value("smax", 1u);
        p.h_max = j.value("h_max", uint64_t(0));
        p.skip_no_primitive = j.value("skip_no_primitive", false);
        for (const auto& e : j.value("labels", json::array())) {
            BankSpec spec;
            if (e.contains("primes"))
                spec.primes = e.at("primes").get<std::vector<uint64_t>>();
            if (e.contains("interval"))
                spec.interval = {e.at("interval").at(0).get<uint64_t>(),
                                 e.at("interval").at(1).get<uint64_t>()};
            if (e.contains("target"))
                spec.target = {e.at("target").at(0).get<double>(),
                               e.at("target").at(1).get<double>()};
            p.labels.push_back({label_from_json(e), spec});
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("params: ") + ex.what());
    }
    return p;
}

nlohmann::ordered_json to_json(const Construction& c) {
    ordered_json j;
    j["params"] = params_to_json(c.params);
    ordered_json banks = ordered_json::array();
    for (const auto& b : c.banks)
        banks.push_back(ordered_json{{"label", label_to_json(b.label)}, {"primes", b.primes}});
    j["banks"] = banks;
    ordered_json entries = ordered_json::array();
    for (const auto& e : c.entries)
        entries.push_back(ordered_json{{"label", label_to_json(e.label)},
                                       {"I", e.index_set},
                                       {"m", e.m.get_str()},
                                       {"q", e.q.get_str()},
                                       {"target_exponent", e.target_exponent}});
    j["entries"] = entries;
    ordered_json per_label = ordered_json::array();
    for (const auto& lr : c.per_label)
        per_label.push_back(ordered_json{{"label", label_to_json(lr.label)},
                                         {"W_r", lr.modulus.get_str()},
                                         {"b_r", lr.residue.get_str()}});
    j["per_label"] = per_label;
    j["W"] = c.modulus.get_str();
    j["b"] = c.residue.get_str();
    j["gcd_wb"] = c.gcd_wb.get_str();
    j["tool_version"] = c.tool_version;
    return j;
}

Construction construction_from_json(const json& j) {
    Construction c;
    try {
        c.params = params_from_json(j.at("params"));
        for (const auto& b : j.at("banks")) {
            PrimeBank bank;
            bank.label = label_from_json(b.at("label"));
            bank.primes = b.at("primes").get<std::vector<uint64_t>>();
            for (uint64_t p : bank.primes)
                bank.product_value *= static_cast<double>(p) / (static_cast<double>(p) - 1.0);
            c.banks.push_back(std::move(bank));
        }
        for (const auto& e : j.at("entries")) {
            CoverEntry entry;
            entry.label = label_from_json(e.at("label"));
            entry.index_set = e.at("I").get<std::vector<unsigned>>();
            entry.m = Int(e.at("m").get<std::string>());
            entry.q = Int(e.at("q").get<std::string>());
            entry.target_exponent = e.at("target_exponent").get<unsigned>();
            c.entries.push_back(std::move(entry));
        }
        for (const auto& lr : j.at("per_label")) {
            LabelResult r;
            r.label = label_from_json(lr.at("label"));
            r.modulus = Int(lr.at("W_r").get<std::string>());
            r.residue = Int(lr.at("b_r").get<std::string>());
            c.per_label.push_back(std::move(r));
        }
        c.modulus = Int(j.at("W").get<std::string>());
        c.residue = Int(j.at("b").get<std::string>());
        c.gcd_wb = Int(j.at("gcd_wb").get<std::string>());
        c.tool_version = j.at("tool_version").get<std::string>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("construction artifact: ") + ex.what());
    }
    c.validate();
    return c;
}

void save(const Construction& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("save: cannot open " + path);
    out << to_json(c).dump(2) << "\n";
}

Construction load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("load: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("load: ") + ex.what());
    }
    return construction_from_json(j);
}

} // namespace omega_forge::construct
