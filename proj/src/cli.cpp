#include "polyfield/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "polyfield/dynamics.hpp"
#include "polyfield/error.hpp"
#include "polyfield/extract.hpp"
#include "polyfield/io.hpp"
#include "polyfield/mcmc.hpp"
#include "polyfield/oracle.hpp"
#include "polyfield/random.hpp"
#include "polyfield/render.hpp"

namespace polyfield {

namespace {

using nlohmann::json;

/// Bad flag values or combinations detected after parsing: exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kChainTag = 0x636861696e;  // "chain"

struct Global {
    std::uint64_t seed = 0;
    bool json_errors = false;
    int chains = 1;
};

struct FieldArgs {
    std::string lattice;
    std::string tessellation;
    std::string init;
    int k = 3;
    double alpha_v = 0.5;
    double pi = 0.5;
};

struct ScheduleArgs {
    AnnealSchedule schedule;
    double tau = 100.0;
};

struct FluxArgs {
    double sigma = 3.0;
    double beta = 1.0;
    double c = 2.0;
    std::string mode = "per-step";
    std::string scale = "max";

    FluxMode flux_mode() const { return mode == "integrated" ? FluxMode::Integrated : FluxMode::PerStep; }
    GradientScale gradient_scale() const {
        return scale == "none" ? GradientScale::None : scale == "sigma" ? GradientScale::Sigma : GradientScale::Max;
    }
};

std::pair<int, int> parse_dims(const std::string& s, const char* flag) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument(s);
        std::size_t p1 = 0, p2 = 0;
        const int a = std::stoi(s.substr(0, x), &p1);
        const int b = std::stoi(s.substr(x + 1), &p2);
        if (p1 != x || p2 != s.size() - x - 1 || a < 1 || b < 1) throw std::invalid_argument(s);
        return {a, b};
    } catch (const std::logic_error&) {
        throw UsageError(std::string(flag) + " expects AxB with positive integers, got '" + s + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// m.json -> m.chain2.json when several chains share one path.
std::string suffixed(const std::string& path, int chain, int chains) {
    if (path.empty() || chains == 1) return path;
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    const std::string tag = ".chain" + std::to_string(chain);
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

std::uint64_t chain_seed(std::uint64_t seed, int chain, int chains) {
    return chains == 1 ? seed : derive_key(seed, kChainTag, static_cast<std::uint64_t>(chain));
}

/// Runs `job(chain)` for every chain on a small pool and returns the stdout
/// text of each chain in chain order. The first failure (by chain index) is
/// rethrown after all workers finish.
template <typename Job>
std::vector<std::string> run_chains(int chains, Job job) {
    std::vector<std::string> text(static_cast<std::size_t>(chains));
    std::vector<std::exception_ptr> failure(static_cast<std::size_t>(chains));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < chains; i = next++) {
            try {
                text[static_cast<std::size_t>(i)] = job(i);
            } catch (...) {
                failure[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int pool = std::min(chains, hw);
    std::vector<std::thread> threads;
    for (int t = 1; t < pool; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (const auto& f : failure) {
        if (f) std::rethrow_exception(f);
    }
    return text;
}

void add_field_options(CLI::App* sub, FieldArgs& f, bool with_init) {
    sub->add_option("--lattice", f.lattice, "pixel lattice ROWSxCOLS");
    sub->add_option("--tessellation", f.tessellation, "tessellation JSON file");
    if (with_init) sub->add_option("--init", f.init, "initial mosaic JSON file (overrides --lattice/--tessellation)");
    sub->add_option("--k", f.k, "number of colours")->capture_default_str();
    sub->add_option("--alpha-v", f.alpha_v, "V-vertex parameter in [0, 1]")->capture_default_str();
    sub->add_option("--pi", f.pi, "activity of every lattice line, in (0, 1)")->capture_default_str();
}

void add_schedule_options(CLI::App* sub, ScheduleArgs& s) {
    sub->add_option("--beta-start", s.schedule.beta_start, "initial inverse temperature")->capture_default_str();
    sub->add_option("--beta-end", s.schedule.beta_end, "final inverse temperature")->capture_default_str();
    sub->add_option("--multiplier", s.schedule.multiplier, "beta factor per sweep; 0 spans start to end")
        ->capture_default_str();
    sub->add_option("--sweeps", s.schedule.sweeps, "number of sweeps")->capture_default_str();
    sub->add_option("--tau", s.tau, "recolour rate of the chain")->capture_default_str();
}

void add_flux_options(CLI::App* sub, FluxArgs& f) {
    sub->add_option("--sigma", f.sigma, "Gaussian smoothing width in pixels")->capture_default_str();
    sub->add_option("--beta", f.beta, "flux coupling")->capture_default_str();
    sub->add_option("--c", f.c, "per-segment flux threshold")->capture_default_str();
    sub->add_option("--mode", f.mode, "flux summation")
        ->check(CLI::IsMember({"per-step", "integrated"}))
        ->capture_default_str();
    sub->add_option("--scale", f.scale, "gradient scaling")
        ->check(CLI::IsMember({"none", "sigma", "max"}))
        ->capture_default_str();
}

TessellationPtr field_tessellation(const FieldArgs& f) {
    if (!f.lattice.empty() && !f.tessellation.empty()) throw UsageError("give only one of --lattice and --tessellation");
    if (!f.tessellation.empty()) return tessellation_from_json(read_json(f.tessellation));
    if (f.lattice.empty()) throw UsageError("one of --lattice or --tessellation is required");
    const auto [rows, cols] = parse_dims(f.lattice, "--lattice");
    return build_lattice(rows, cols, f.pi);
}

Mosaic initial_mosaic(const FieldArgs& f) {
    if (!f.init.empty()) {
        auto loaded = mosaic_from_json(read_json(f.init));
        if (loaded.mosaic.k() != f.k) throw UsageError("--k differs from the k of the initial mosaic");
        return std::move(loaded.mosaic);
    }
    return Mosaic(field_tessellation(f), f.k, 1);
}

void write_outputs(const Mosaic& m, const ModelParams* p, const std::string& out_path, const std::string& svg_path,
                   const GrayImage* background) {
    if (!out_path.empty()) write_text(out_path, dump(mosaic_to_json(m, p)));
    if (!svg_path.empty()) {
        SvgOptions opt;
        opt.background = background;
        write_text(svg_path, render_svg(m, opt));
    }
}

json vertex_counts(const Mosaic& m) {
    const auto st = analyze(m);
    return {{"V", st.n_v}, {"T", st.n_t}, {"X", st.n_x}, {"edges", st.edges.size()}};
}

void write_trace(const std::string& path, const std::vector<TracePoint>& trace) {
    if (path.empty()) return;
    std::ostringstream os;
    os << "sweep,beta,score,best\n";
    for (const auto& tp : trace) os << tp.sweep << ',' << fmt(tp.beta) << ',' << fmt(tp.score) << ',' << fmt(tp.best) << '\n';
    write_text(path, os.str());
}

// Subcommands ---------------------------------------------------------------

struct SampleArgs {
    FieldArgs field;
    std::string out, svg, png;
    int raster_scale = 8;
};

void cmd_sample(const SampleArgs& a, const Global& g, std::ostream& out) {
    const auto t = field_tessellation(a.field);
    const ModelParams p = derive_params(a.field.k, a.field.alpha_v);
    const auto text = run_chains(g.chains, [&](int i) {
        const std::uint64_t seed = chain_seed(g.seed, i, g.chains);
        const Mosaic m = sample_exact(t, p, seed);
        write_outputs(m, &p, suffixed(a.out, i, g.chains), suffixed(a.svg, i, g.chains), nullptr);
        if (!a.png.empty()) write_png(render_raster(m, a.raster_scale), suffixed(a.png, i, g.chains));
        if (a.out.empty()) return dump(mosaic_to_json(m, &p));
        json s{{"chain", i}, {"seed", seed}, {"log_weight", log_weight(m, p)}, {"vertices", vertex_counts(m)}};
        return s.dump() + "\n";
    });
    for (const auto& s : text) out << s;
}

struct McmcArgs {
    FieldArgs field;
    std::uint64_t events = 100000;
    double tau = 1.0;
    double segment_weight = 0.0;
    std::string diagnostics, out;
    bool tv = false;
    double burn_in = 0.1;
};

void cmd_mcmc(const McmcArgs& a, const Global& g, std::ostream& out) {
    const Mosaic start = initial_mosaic(a.field);
    const ModelParams p = derive_params(a.field.k, a.field.alpha_v);
    if (!(a.burn_in >= 0.0 && a.burn_in < 1.0)) throw UsageError("--burn-in must lie in [0, 1)");
    SegmentCountModifier h(a.segment_weight);
    const GibbsModifier* modifier = a.segment_weight != 0.0 ? &h : nullptr;
    std::optional<ExactTable> table;
    if (a.tv) {
        const auto& lat = start.tessellation().lattice();
        if (!lat) throw UsageError("--tv needs a lattice");
        std::vector<double> acts;
        for (const auto& l : start.tessellation().lines()) acts.push_back(l.activity);
        table = enumerate_exact(lat->rows, lat->cols, p, acts, modifier);
    }
    const auto text = run_chains(g.chains, [&](int i) {
        const std::uint64_t seed = chain_seed(g.seed, i, g.chains);
        Chain chain(ChainState::from_mosaic(start), Target{p, modifier, 1.0}, a.tau, seed);
        std::unique_ptr<std::ofstream> diag;
        if (!a.diagnostics.empty()) {
            const auto path = suffixed(a.diagnostics, i, g.chains);
            diag = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*diag) throw Error(ErrorCode::Io, "cannot write " + path);
            *diag << "clock,kind,site,delta_phi,delta_h,accepted\n";
        }
        std::map<std::string, std::uint64_t> proposed, accepted;
        std::vector<double> freq(table ? table->size() : 0, 0.0);
        const auto burn = static_cast<std::uint64_t>(std::floor(a.burn_in * static_cast<double>(a.events)));
        for (std::uint64_t e = 0; e < a.events; ++e) {
            const StepRecord r = chain.step();
            const std::string kind(to_string(r.kind));
            ++proposed[kind];
            if (r.accepted) ++accepted[kind];
            if (diag) {
                *diag << fmt(r.clock) << ',' << kind << ',' << r.site << ',' << fmt(r.delta_phi) << ','
                      << fmt(r.delta_h) << ',' << (r.accepted ? 1 : 0) << '\n';
            }
            if (table && e >= burn) freq[state_index(chain.state().mosaic)] += 1.0;
        }
        if (diag && !*diag) throw Error(ErrorCode::Io, "cannot write " + suffixed(a.diagnostics, i, g.chains));
        const Mosaic& m = chain.state().mosaic;
        write_outputs(m, &p, suffixed(a.out, i, g.chains), "", nullptr);
        json s{{"chain", i},
               {"seed", seed},
               {"events", a.events},
               {"clock", chain.state().clock},
               {"proposed", proposed},
               {"accepted", accepted},
               {"log_weight", chain.log_weight()},
               {"vertices", vertex_counts(m)}};
        if (table) {
            const double n = static_cast<double>(a.events - burn);
            for (auto& f : freq) f /= n;
            s["tv"] = tv_distance(freq, table->probabilities);
        }
        return s.dump() + "\n";
    });
    for (const auto& s : text) out << s;
}

struct EnumerateArgs {
    std::string lattice;
    int k = 3;
    double alpha_v = 0.5;
    double pi = 0.5;
    double segment_weight = 0.0;
    std::uint64_t cap = kEnumerationCap;
    std::string out;
};

void cmd_enumerate(const EnumerateArgs& a, std::ostream& out) {
    const auto [rows, cols] = parse_dims(a.lattice, "--lattice");
    const ModelParams p = derive_params(a.k, a.alpha_v);
    const std::vector<double> acts(static_cast<std::size_t>(rows + cols - 2), a.pi);
    SegmentCountModifier h(a.segment_weight);
    const auto table = enumerate_exact(rows, cols, p, acts, a.segment_weight != 0.0 ? &h : nullptr, a.cap);
    if (a.out.empty()) {
        write_csv(table, out);
        return;
    }
    std::ostringstream os;
    write_csv(table, os);
    write_text(a.out, os.str());
}

struct ScoreArgs {
    std::string mosaic;
    std::optional<double> alpha_v;
    double segment_weight = 0.0;
    std::uint64_t cap = kEnumerationCap;
};

void cmd_score(const ScoreArgs& a, std::ostream& out) {
    auto loaded = mosaic_from_json(read_json(a.mosaic));
    const auto alpha_v = a.alpha_v ? a.alpha_v : loaded.alpha_v;
    if (!alpha_v) throw UsageError("the mosaic records no model; pass --alpha-v");
    const Mosaic& m = loaded.mosaic;
    const ModelParams p = derive_params(m.k(), *alpha_v);
    const auto violations = validate(m);
    if (!violations.empty()) throw Error(ErrorCode::AdmissibilityViolation, violations.front().message);
    SegmentCountModifier h(a.segment_weight);
    const GibbsModifier* modifier = a.segment_weight != 0.0 ? &h : nullptr;
    const double lw = log_weight(m, p);
    json s{{"k", m.k()},
           {"alpha_v", *alpha_v},
           {"phi", hamiltonian_phi(m, p)},
           {"log_weight", lw},
           {"weight", std::exp(lw)},
           {"log_partition", log_partition_function(m.tessellation(), p)},
           {"probability", probability(m, p, modifier, a.cap)},
           {"vertices", vertex_counts(m)}};
    if (modifier) s["h"] = h.evaluate(m);
    out << s.dump(2) << '\n';
}

struct AnnealArgs {
    FieldArgs field;
    ScheduleArgs sched;
    FluxArgs flux;
    std::string image;
    double segment_weight = 1.0;
    std::string out, svg, trace;
};

GradientField scaled_gradient(const GrayImage& img, const FluxArgs& f) {
    GradientField g = gradient_field(img, f.sigma);
    switch (f.gradient_scale()) {
        case GradientScale::None: return g;
        case GradientScale::Sigma: return g.scaled(1.0 / f.sigma);
        case GradientScale::Max: {
            const double mx = g.max_magnitude();
            return mx > 0.0 ? g.scaled(mx) : g;
        }
    }
    return g;
}

void cmd_anneal(const AnnealArgs& a, const Global& g, std::ostream& out) {
    a.sched.schedule.validate();
    const Mosaic start = initial_mosaic(a.field);
    const ModelParams p = derive_params(a.field.k, a.field.alpha_v);
    std::unique_ptr<GibbsModifier> modifier;
    std::optional<GrayImage> img;
    if (!a.image.empty()) {
        img = read_image(a.image);
        modifier = std::make_unique<FluxModifier>(scaled_gradient(*img, a.flux), start.tessellation_ptr(), a.flux.beta,
                                                  a.flux.c, a.flux.flux_mode());
    } else {
        modifier = std::make_unique<SegmentCountModifier>(a.segment_weight);
    }
    const auto text = run_chains(g.chains, [&](int i) {
        const std::uint64_t seed = chain_seed(g.seed, i, g.chains);
        const auto r = anneal(ChainState::from_mosaic(start), p, *modifier, a.sched.schedule, a.sched.tau, seed);
        write_outputs(r.best, &p, suffixed(a.out, i, g.chains), suffixed(a.svg, i, g.chains), img ? &*img : nullptr);
        write_trace(suffixed(a.trace, i, g.chains), r.trace);
        json s{{"chain", i},
               {"seed", seed},
               {"best_score", r.best_score},
               {"h", modifier->evaluate(r.best)},
               {"active_segments", r.best.active_count()},
               {"vertices", vertex_counts(r.best)}};
        return s.dump() + "\n";
    });
    for (const auto& s : text) out << s;
}

struct ExtractArgs {
    std::string image;
    std::string hough = "80x80";
    std::string voting = "oriented";
    ExtractionConfig cfg;
    FluxArgs flux;
    ScheduleArgs sched;
    std::string out, svg, tessellation_out, trace;
};

void cmd_extract(ExtractArgs a, const Global& g, std::ostream& out) {
    const auto [nr, nt] = parse_dims(a.hough, "--hough");
    ExtractionConfig cfg = a.cfg;
    cfg.bins = {nr, nt};
    cfg.voting = a.voting == "full" ? HoughVoting::Full : HoughVoting::Oriented;
    cfg.sigma = a.flux.sigma;
    cfg.beta = a.flux.beta;
    cfg.c = a.flux.c;
    cfg.mode = a.flux.flux_mode();
    cfg.scale = a.flux.gradient_scale();
    cfg.schedule = a.sched.schedule;
    cfg.tau = a.sched.tau;
    cfg.validate();
    const GrayImage img = read_image(a.image);
    const auto text = run_chains(g.chains, [&](int i) {
        const std::uint64_t seed = chain_seed(g.seed, i, g.chains);
        const auto r = extract_network(img, cfg, seed);
        const ModelParams p = derive_params(cfg.k, cfg.alpha_v);
        write_outputs(r.mosaic, &p, suffixed(a.out, i, g.chains), suffixed(a.svg, i, g.chains), &img);
        if (!a.tessellation_out.empty()) {
            write_text(suffixed(a.tessellation_out, i, g.chains), dump(tessellation_to_json(*r.tessellation)));
        }
        write_trace(suffixed(a.trace, i, g.chains), r.trace);
        json s{{"chain", i},
               {"seed", seed},
               {"lines", r.tessellation->line_count()},
               {"active_segments", r.mosaic.active_count()},
               {"score", r.score},
               {"flux_energy", r.flux_energy}};
        return s.dump() + "\n";
    });
    for (const auto& s : text) out << s;
}

struct ValidateArgs {
    std::string mosaic;
    std::string tessellation;
};

/// Returns false when the input is not valid.
bool cmd_validate(const ValidateArgs& a, std::ostream& out) {
    if (a.mosaic.empty() == a.tessellation.empty()) throw UsageError("give exactly one of --mosaic and --tessellation");
    json report;
    const auto j = read_json(a.mosaic.empty() ? a.tessellation : a.mosaic);
    try {
        if (!a.mosaic.empty()) {
            const auto loaded = mosaic_from_json(j, true);
            json list = json::array();
            for (const auto& v : validate(loaded.mosaic)) {
                list.push_back({{"kind", to_string(v.kind)}, {"location", v.location}, {"message", v.message}});
            }
            report = {{"kind", "mosaic"}, {"valid", list.empty()}, {"violations", list}};
        } else {
            const auto t = tessellation_from_json(j);
            report = {{"kind", "tessellation"},
                      {"valid", true},
                      {"lines", t->line_count()},
                      {"nodes", t->node_count()},
                      {"cells", t->cell_count()},
                      {"segments", t->segment_count()}};
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse || e.code() == ErrorCode::Io) throw;
        report = {{"kind", a.mosaic.empty() ? "tessellation" : "mosaic"},
                  {"valid", false},
                  {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
    }
    out << report.dump(2) << '\n';
    return report["valid"].get<bool>();
}

struct RenderArgs {
    std::string mosaic, svg, png, background;
    double scale = 4.0;
    int raster_scale = 8;
    bool no_fill = false;
};

void cmd_render(const RenderArgs& a, std::ostream& out) {
    const auto loaded = mosaic_from_json(read_json(a.mosaic));
    std::optional<GrayImage> bg;
    if (!a.background.empty()) bg = read_image(a.background);
    SvgOptions opt;
    opt.background = bg ? &*bg : nullptr;
    opt.fill = !a.no_fill;
    opt.scale = a.scale;
    if (!(opt.scale > 0.0)) throw UsageError("--scale must be positive");
    const std::string svg = render_svg(loaded.mosaic, opt);
    if (!a.svg.empty()) write_text(a.svg, svg);
    if (!a.png.empty()) write_png(render_raster(loaded.mosaic, a.raster_scale), a.png);
    if (a.svg.empty() && a.png.empty()) out << svg;
}

int fail(const Global& g, std::ostream& err, int code, const std::string& kind, const std::string& message) {
    if (g.json_errors) {
        err << json{{"error", {{"code", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
    } else {
        err << "error: " << message << '\n';
    }
    return code;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Global g;
    CLI::App app{"Multi-colour polygonal random fields on line tessellations"};
    app.name(argc > 0 ? argv[0] : "polyfield");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "random seed (default: $POLYFIELD_SEED, else 0)");
    app.add_flag("--json-errors", g.json_errors, "report errors as JSON on stderr");
    app.add_option("--chains", g.chains, "independent chains for sample, mcmc, anneal and extract")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "exact sample from the consistent field");
    add_field_options(s, sample.field, false);
    s->add_option("--out", sample.out, "mosaic JSON (default: stdout)");
    s->add_option("--svg", sample.svg, "SVG rendering");
    s->add_option("--png", sample.png, "raster rendering");
    s->add_option("--raster-scale", sample.raster_scale, "PNG pixels per domain unit")->capture_default_str();

    McmcArgs mcmc;
    auto* mc = app.add_subcommand("mcmc", "birth-death-recolour chain");
    add_field_options(mc, mcmc.field, true);
    mc->add_option("--events", mcmc.events, "clock ticks to simulate")->capture_default_str();
    mc->add_option("--tau", mcmc.tau, "recolour rate")->capture_default_str();
    mc->add_option("--segment-weight", mcmc.segment_weight, "modifier H = weight * active segments (0: none)")
        ->capture_default_str();
    mc->add_option("--diagnostics", mcmc.diagnostics, "per-event CSV");
    mc->add_option("--out", mcmc.out, "final mosaic JSON");
    mc->add_flag("--tv", mcmc.tv, "report total variation to the exact law (lattices only)");
    mc->add_option("--burn-in", mcmc.burn_in, "fraction of events discarded for --tv")->capture_default_str();

    EnumerateArgs en;
    auto* e = app.add_subcommand("enumerate", "exact table of every pixel array");
    e->add_option("--lattice", en.lattice, "pixel lattice ROWSxCOLS")->required();
    e->add_option("--k", en.k, "number of colours")->capture_default_str();
    e->add_option("--alpha-v", en.alpha_v, "V-vertex parameter")->capture_default_str();
    e->add_option("--pi", en.pi, "line activity")->capture_default_str();
    e->add_option("--segment-weight", en.segment_weight, "modifier H = weight * active segments")->capture_default_str();
    e->add_option("--cap", en.cap, "maximum number of states")->capture_default_str();
    e->add_option("--out", en.out, "CSV file (default: stdout)");

    ScoreArgs sc;
    auto* so = app.add_subcommand("score", "Hamiltonian, weight and probability of a mosaic");
    so->add_option("--mosaic", sc.mosaic, "mosaic JSON")->required();
    so->add_option("--alpha-v", sc.alpha_v, "override the recorded alpha_v");
    so->add_option("--segment-weight", sc.segment_weight, "modifier H = weight * active segments")->capture_default_str();
    so->add_option("--cap", sc.cap, "enumeration cap when a modifier is present")->capture_default_str();

    AnnealArgs an;
    auto* a = app.add_subcommand("anneal", "simulated annealing under a Gibbs modifier");
    add_field_options(a, an.field, true);
    add_schedule_options(a, an.sched);
    add_flux_options(a, an.flux);
    a->add_option("--image", an.image, "PGM/PNG image: use the flux modifier");
    a->add_option("--segment-weight", an.segment_weight, "without --image: H = weight * active segments")
        ->capture_default_str();
    a->add_option("--out", an.out, "best mosaic JSON");
    a->add_option("--svg", an.svg, "SVG rendering");
    a->add_option("--trace", an.trace, "per-sweep CSV");

    ExtractArgs ex;
    auto* x = app.add_subcommand("extract", "line network extraction from an image");
    x->add_option("--image", ex.image, "PGM or PNG image")->required();
    add_flux_options(x, ex.flux);
    add_schedule_options(x, ex.sched);
    x->add_option("--hough", ex.hough, "accumulator bins RHOxTHETA")->capture_default_str();
    x->add_option("--voting", ex.voting, "Hough voting: oriented or full")
        ->check(CLI::IsMember({"oriented", "full"}))
        ->capture_default_str();
    x->add_option("--top", ex.cfg.n_top, "global accumulator maxima taken first")->capture_default_str();
    x->add_option("--lines", ex.cfg.lines, "total number of lines")->capture_default_str();
    x->add_option("--k", ex.cfg.k, "number of colours")->capture_default_str();
    x->add_option("--alpha-v", ex.cfg.alpha_v, "V-vertex parameter")->capture_default_str();
    x->add_option("--activity", ex.cfg.activity, "activity of every extracted line")->capture_default_str();
    x->add_option("--out", ex.out, "mosaic JSON");
    x->add_option("--svg", ex.svg, "overlay SVG on the image");
    x->add_option("--tessellation-out", ex.tessellation_out, "extracted lines as tessellation JSON");
    x->add_option("--trace", ex.trace, "per-sweep CSV");

    ValidateArgs va;
    auto* v = app.add_subcommand("validate", "admissibility of a mosaic or regularity of a tessellation");
    v->add_option("--mosaic", va.mosaic, "mosaic JSON");
    v->add_option("--tessellation", va.tessellation, "tessellation JSON");

    RenderArgs re;
    auto* r = app.add_subcommand("render", "mosaic JSON to SVG and/or PNG");
    r->add_option("--mosaic", re.mosaic, "mosaic JSON")->required();
    r->add_option("--svg", re.svg, "SVG file (default: stdout when no --png)");
    r->add_option("--png", re.png, "raster file");
    r->add_option("--background", re.background, "PGM/PNG image under the SVG");
    r->add_option("--scale", re.scale, "SVG pixels per domain unit")->capture_default_str();
    r->add_option("--raster-scale", re.raster_scale, "PNG pixels per domain unit")->capture_default_str();
    r->add_flag("--no-fill", re.no_fill, "draw edges only");

    // The environment only supplies a default; an explicit --seed wins.
    if (const char* env = std::getenv("POLYFIELD_SEED"); env && *env) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || *end != '\0' || env[0] == '-') {
            return fail(g, err, 2, "InvalidArgument", std::string("POLYFIELD_SEED is not an unsigned integer: ") + env);
        }
        g.seed = v;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ok) {
        return app.exit(ok, out, err);
    } catch (const CLI::ParseError& pe) {
        return fail(g, err, 2, "ArgumentError", pe.what());
    }

    try {
        if (s->parsed()) cmd_sample(sample, g, out);
        else if (mc->parsed()) cmd_mcmc(mcmc, g, out);
        else if (e->parsed()) cmd_enumerate(en, out);
        else if (so->parsed()) cmd_score(sc, out);
        else if (a->parsed()) cmd_anneal(an, g, out);
        else if (x->parsed()) cmd_extract(ex, g, out);
        else if (v->parsed()) return cmd_validate(va, out) ? 0 : 1;
        else if (r->parsed()) cmd_render(re, out);
    } catch (const UsageError& ue) {
        return fail(g, err, 2, "ArgumentError", ue.what());
    } catch (const Error& le) {
        const int code = le.code() == ErrorCode::InvalidArgument ? 2 : 1;
        return fail(g, err, code, std::string(to_string(le.code())), le.what());
    } catch (const std::exception& ex2) {
        return fail(g, err, 1, "Internal", ex2.what());
    }
    return 0;
}

} // namespace polyfield
