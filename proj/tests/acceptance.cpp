// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. argv[1] is the path of the polyfield executable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "polyfield/dynamics.hpp"
#include "polyfield/extract.hpp"
#include "polyfield/mcmc.hpp"
#include "polyfield/oracle.hpp"
#include "polyfield/random.hpp"

using namespace polyfield;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        o.pass = false;
        o.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
    }
    if (!o.pass) ++failures;
    char head[160];
    std::snprintf(head, sizeof head, "criterion %2d %s: %s (%.1f s) ", id, o.pass ? "PASS" : "FAIL", name, secs);
    std::cout << head << o.detail << std::endl;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const std::vector<double> kAnchorActs{0.5, 0.5};


// 1 and 2 -------------------------------------------------------------------

Verdict partition_and_normalization(bool normalization) {
    double worst_z = 0.0, worst_sum = 0.0, anchor = 0.0;
    int instances = 0;
    for (int rows : {2, 3}) {
        for (int cols : {2, 3}) {
            for (int k : {2, 3, 4}) {
                for (double av : {0.0, 0.25, 0.5, 1.0}) {
                    for (double pi : {0.3, 0.5, 0.7}) {
                        const std::vector<double> acts(static_cast<std::size_t>(rows + cols - 2), pi);
                        const auto table = enumerate_exact(rows, cols, derive_params(k, av), acts);
                        worst_z = std::max(worst_z, std::abs(table.z - table.z_closed_form) / table.z_closed_form);
                        const double sum = compensated_sum(table.probabilities);
                        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
                        if (rows == 2 && cols == 2 && k == 3 && av == 0.5 && pi == 0.5) anchor = table.z_closed_form;
                        ++instances;
                    }
                }
            }
        }
    }
    if (normalization) {
        return {worst_sum <= 1e-12, std::to_string(instances) + " instances, max |sum - 1| = " + sci(worst_sum)};
    }
    const bool anchor_ok = std::abs(anchor - 7.2) <= 1e-12 * 7.2;
    return {worst_z <= 1e-12 && anchor_ok,
            std::to_string(instances) + " instances, max relative error " + sci(worst_z) + ", anchor Z = " +
                sci(anchor)};
}

// 3 ---------------------------------------------------------------------------

Verdict sampler_law() {
    const auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const auto table = enumerate_exact(2, 2, p, kAnchorActs);
    const int n = 1'000'000;
    std::vector<double> freq(table.size(), 0.0);
    for (int i = 0; i < n; ++i) freq[state_index(sample_exact(t, p, derive_key(3, static_cast<std::uint64_t>(i))))] += 1.0;
    for (auto& f : freq) f /= n;
    const double tv = tv_distance(freq, table.probabilities);
    return {tv <= 0.01, "TV = " + sci(tv) + " over 1e6 draws"};
}

// 4 ---------------------------------------------------------------------------

Verdict consistency() {
    const std::vector<double> acts{0.3, 0.7, 0.45, 0.6};
    double worst = 0.0;
    int windows = 0;
    for (int k : {2, 3, 4}) {
        for (double av : {0.0, 0.5, 1.0}) {
            const auto p = derive_params(k, av);
            const auto full = enumerate_exact(3, 3, p, acts);
            for (int r0 = 0; r0 < 3; ++r0) {
                for (int c0 = 0; c0 < 3; ++c0) {
                    for (int h = 1; r0 + h <= 3; ++h) {
                        for (int w = 1; c0 + w <= 3; ++w) {
                            const auto m = marginal(full, r0, c0, h, w);
                            const auto direct = enumerate_exact(h, w, p, sub_activities(3, 3, acts, r0, c0, h, w));
                            for (std::size_t i = 0; i < m.size(); ++i) {
                                worst = std::max(worst, std::abs(m.probabilities[i] - direct.probabilities[i]));
                            }
                            ++windows;
                        }
                    }
                }
            }
        }
    }
    return {worst <= 1e-12, std::to_string(windows) + " windows, max abs deviation " + sci(worst)};
}

// 5 ---------------------------------------------------------------------------

Verdict factorisation() {
    const double a = factorisation_check(2, 2, derive_params(3, 0.5), kAnchorActs);
    const double b = factorisation_check(3, 2, derive_params(2, 0.5), std::vector<double>{0.5, 0.5, 0.5});
    return {std::max(a, b) <= 1e-12, "2x2 k=3: " + sci(a) + ", 3x2 k=2: " + sci(b)};
}

// 6 ---------------------------------------------------------------------------

Verdict transect() {
    double worst_exact = 0.0;
    const auto exact = [&](int rows, int cols, int k, double av, const std::vector<double>& acts) {
        const auto table = enumerate_exact(rows, cols, derive_params(k, av), acts);
        const auto t = build_lattice(rows, cols, acts);
        const auto probs = segment_activity_probabilities(table, *t);
        for (std::size_t s = 0; s < probs.size(); ++s) {
            const double pi = acts[static_cast<std::size_t>(t->segments()[s].line)];
            worst_exact = std::max(worst_exact, std::abs(probs[s] - pi / (1.0 + pi)));
        }
    };
    for (auto [k, av] : {std::pair{2, 1.0}, std::pair{3, 0.5}, std::pair{4, 0.0}, std::pair{4, 0.25}}) {
        exact(3, 3, k, av, {0.3, 0.7, 0.45, 0.6});
    }
    exact(3, 4, 3, 0.5, {0.3, 0.7, 0.2, 0.5, 0.8});

    // The segment each line opens with is where a transect just inside the
    // entry boundary meets it.
    const auto t = build_lattice(12, 12, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.25, 0.5,
                                                             0.75, 0.15, 0.35, 0.55, 0.65, 0.85, 0.95, 0.05, 0.45,
                                                             0.5, 0.5});
    const auto p = derive_params(3, 0.5);
    const int n = 100'000;
    std::vector<int> hits(t->line_count(), 0);
    for (int i = 0; i < n; ++i) {
        const auto m = sample_exact(t, p, derive_key(6, static_cast<std::uint64_t>(i)));
        for (std::size_t l = 0; l < t->line_count(); ++l) hits[l] += m.active(t->line_segments(static_cast<int>(l)).front());
    }
    double worst_z = 0.0;
    for (std::size_t l = 0; l < t->line_count(); ++l) {
        const double pi = t->lines()[l].activity, q = pi / (1.0 + pi);
        const double se = std::sqrt(q * (1.0 - q) / n);
        worst_z = std::max(worst_z, std::abs(hits[l] / static_cast<double>(n) - q) / se);
    }
    return {worst_exact <= 1e-12 && worst_z <= 3.0,
            "exact max deviation " + sci(worst_exact) + "; empirical max |z| = " + sci(worst_z) + " over " +
                std::to_string(t->line_count()) + " lines, 1e5 draws"};
}

// 7 and 8 -------------------------------------------------------------------

double chain_tv(const GibbsModifier* modifier, std::uint64_t seed) {
    const auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const auto table = enumerate_exact(2, 2, p, kAnchorActs, modifier);
    Chain chain(ChainState::from_mosaic(Mosaic(t, 3, 1)), Target{p, modifier, 1.0}, 1.0, seed);
    const std::uint64_t events = 11'000'000, burn = 1'000'000;
    std::vector<double> freq(table.size(), 0.0);
    for (std::uint64_t e = 0; e < events; ++e) {
        chain.step();
        if (e >= burn) freq[state_index(chain.state().mosaic)] += 1.0;
    }
    for (auto& f : freq) f /= static_cast<double>(events - burn);
    return tv_distance(freq, table.probabilities);
}

// 9 ---------------------------------------------------------------------------

Verdict degeneracies() {
    const auto t = build_lattice(8, 8, 0.5);
    long x_at_one = 0, v_at_zero = 0, t_at_two = 0, samples = 0;
    for (int k : {2, 3}) {
        const auto p = derive_params(k, 1.0);
        for (int i = 0; i < 10'000; ++i) {
            const auto st = analyze(sample_exact(t, p, derive_key(9, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i))));
            x_at_one += st.n_x;
            if (k == 2) t_at_two += st.n_t;
            ++samples;
        }
    }
    for (int k : {2, 3}) {
        const auto p = derive_params(k, 0.0);
        for (int i = 0; i < 10'000; ++i) {
            const auto st = analyze(sample_exact(t, p, derive_key(19, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i))));
            if (k == 3) v_at_zero += st.n_v;
            if (k == 2) t_at_two += st.n_t;
            ++samples;
        }
    }
    return {x_at_one == 0 && v_at_zero == 0 && t_at_two == 0,
            "X at alpha_V=1: " + std::to_string(x_at_one) + ", V at alpha_V=0 (k=3): " + std::to_string(v_at_zero) +
                ", T at k=2: " + std::to_string(t_at_two) + " over " + std::to_string(samples) + " samples of 8x8"};
}

// 10 --------------------------------------------------------------------------

Verdict extraction(double& slowest) {
    const auto truth = grid_benchmark_truth();
    int good = 0;
    std::ostringstream scores;
    for (std::uint64_t run = 0; run < 10; ++run) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto img = grid_benchmark_image(0.1, run);
        const auto r = extract_network(img, ExtractionConfig{}, run);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const auto s = edge_f1(r.mosaic, truth, 2.0);
        good += s.f1 >= 0.9;
        scores << (run ? " " : "") << sci(s.f1);
    }
    return {good >= 8 && slowest < 180.0,
            std::to_string(good) + "/10 runs with F1 >= 0.9; F1 = [" + scores.str() + "]; slowest run " +
                sci(slowest) + " s"};
}

// 11 --------------------------------------------------------------------------

std::uint64_t fnv1a(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c; in.get(c);) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    return h;
}

Verdict determinism(const std::string& exe) {
    const fs::path dir = fs::temp_directory_path() / ("polyfield_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto at = [&](const std::string& name) { return (dir / name).string(); };
    write_pgm(grid_benchmark_image(0.1, 1), at("field.pgm"));

    // Inputs shared by both runs.
    const std::string base = "'" + exe + "' ";
    if (std::system((base + "sample --lattice 6x6 --k 3 --seed 1 --out " + at("in.json") + " > /dev/null").c_str()) != 0) {
        return {false, "could not prepare inputs"};
    }
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"sample --lattice 16x16 --k 3 --alpha-v 0.5 --pi 0.5 --seed 7 --out @m.json --svg @m.svg --png @m.png", {"m.json", "m.svg", "m.png"}},
        {"--chains 3 sample --lattice 8x8 --k 4 --seed 3 --out @c.json", {"c.chain0.json", "c.chain1.json", "c.chain2.json"}},
        {"mcmc --lattice 3x3 --k 3 --events 20000 --seed 5 --diagnostics @d.csv --out @mc.json", {"d.csv", "mc.json"}},
        {"enumerate --lattice 2x2 --k 3 --alpha-v 0.5 --pi 0.5 --out @e.csv", {"e.csv"}},
        {"anneal --init " + at("in.json") + " --k 3 --sweeps 30 --seed 2 --out @a.json --trace @a.csv", {"a.json", "a.csv"}},
        {"extract --image " + at("field.pgm") + " --sweeps 40 --seed 4 --out @x.json --svg @x.svg --tessellation-out @xt.json", {"x.json", "x.svg", "xt.json"}},
        {"render --mosaic " + at("in.json") + " --svg @r.svg --png @r.png --background " + at("field.pgm"), {"r.svg", "r.png"}},
        {"score --mosaic " + at("in.json"), {}},
        {"validate --mosaic " + at("in.json"), {}},
    };
    int mismatched = 0, compared = 0;
    std::string bad;
    for (const auto& [cmd, files] : commands) {
        std::uint64_t digest[2] = {0, 0};
        for (int pass = 0; pass < 2; ++pass) {
            std::string line = cmd;
            const std::string prefix = (dir / (pass ? "b_" : "a_")).string();
            for (auto pos = line.find('@'); pos != std::string::npos; pos = line.find('@', pos)) line.replace(pos, 1, prefix);
            const std::string stdout_file = prefix + "stdout.txt";
            if (std::system((base + line + " > " + stdout_file).c_str()) != 0) {
                fs::remove_all(dir);
                return {false, "command failed: " + cmd};
            }
            std::uint64_t h = fnv1a(stdout_file);
            for (const auto& f : files) h = h * 31 + fnv1a(prefix + f);
            digest[pass] = h;
        }
        ++compared;
        if (digest[0] != digest[1]) {
            ++mismatched;
            bad += " " + cmd.substr(0, cmd.find(' '));
        }
    }
    fs::remove_all(dir);
    return {mismatched == 0, std::to_string(compared) + " invocations double-run, " + std::to_string(mismatched) +
                                 " hash mismatches" + bad};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path to polyfield executable>\n";
        return 2;
    }
    report(1, "partition function closed form vs enumeration", 5.0, [] { return partition_and_normalization(false); });
    report(2, "normalization", 5.0, [] { return partition_and_normalization(true); });
    report(3, "exact sampler law", 60.0, sampler_law);
    report(4, "consistency of sub-rectangle marginals", 30.0, consistency);
    report(5, "Markov factorisation", 5.0, factorisation);
    report(6, "line-transect law", 60.0, transect);
    report(7, "chain stationarity", 300.0, [] {
        const double tv = chain_tv(nullptr, 7);
        return Verdict{tv <= 0.02, "TV = " + sci(tv) + " over 1e7 events after 1e6 burn-in"};
    });
    report(8, "Metropolis-Hastings with a segment modifier", 300.0, [] {
        const SegmentCountModifier h(1.0);
        const double tv = chain_tv(&h, 8);
        return Verdict{tv <= 0.02, "TV = " + sci(tv) + " over 1e7 events after 1e6 burn-in"};
    });
    report(9, "degeneracy laws", 60.0, degeneracies);
    double slowest = 0.0;
    report(10, "extraction benchmark", 1800.0, [&] { return extraction(slowest); });
    report(11, "determinism", 120.0, [&] { return determinism(argv[1]); });
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failures ? 1 : 0;
}
