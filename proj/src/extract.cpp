#include "polyfield/extract.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "polyfield/error.hpp"
#include "polyfield/random.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

/// Mirror index into [0, n) about the pixel edges: -1 -> 0, n -> n-1.
int reflect(int i, int n) {
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> w(idx(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        w[idx(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += w[idx(k + radius)];
    }
    for (double& x : w) x /= sum;
    return w;
}

double point_segment_distance(Point p, Point a, Point b) {
    const Point d = b - a;
    const double len2 = dot(d, d);
    double s = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return distance(p, a + s * d);
}

template <typename F>
void sample_along(Point a, Point b, double spacing, F&& f) {
    const double len = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
    for (int i = 0; i < n; ++i) f(a + ((i + 0.5) / n) * (b - a), len / n);
}

Error staged(const char* stage, const Error& e) { return Error(e.code(), std::string(stage) + ": " + e.what()); }

} // namespace

// ---------------------------------------------------------------------------
// Images

GrayImage::GrayImage(int w, int h, double fill)
    : width(w), height(h), intensities(idx(std::max(0, w)) * idx(std::max(0, h)), fill) {}

void GrayImage::check() const {
    if (width < 1 || height < 1 || intensities.size() != idx(width) * idx(height)) {
        throw Error(ErrorCode::InvalidArgument, "image size does not match its data");
    }
    for (double v : intensities) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "image has a non-finite intensity");
    }
}

namespace {

GrayImage read_pgm(std::istream& in, const std::string& path) {
    std::string magic;
    in >> magic;
    if (magic != "P5") throw Error(ErrorCode::Parse, path + ": only binary PGM (P5) is supported");
    auto next_int = [&] {
        while (true) {
            in >> std::ws;
            if (in.peek() == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            long v = -1;
            if (!(in >> v)) throw Error(ErrorCode::Parse, path + ": malformed PGM header");
            return v;
        }
    };
    const long w = next_int(), h = next_int(), maxval = next_int();
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535 || w * h > (1L << 28)) {
        throw Error(ErrorCode::Parse, path + ": bad PGM dimensions");
    }
    in.get();  // single whitespace before the raster
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(img.intensities.size() * idx(bytes));
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw Error(ErrorCode::Parse, path + ": truncated PGM raster");
    }
    for (std::size_t i = 0; i < img.intensities.size(); ++i) {
        const unsigned v = bytes == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
        img.intensities[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return img;
}

GrayImage read_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw Error(ErrorCode::Parse, path + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::Parse, path + ": " + msg);
    }
    GrayImage img(static_cast<int>(image.width), static_cast<int>(image.height));
    for (std::size_t i = 0; i < buf.size(); ++i) img.intensities[i] = buf[i] / 255.0;
    return img;
}

std::vector<unsigned char> to_bytes(const GrayImage& img) {
    std::vector<unsigned char> out(img.intensities.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(img.intensities[i], 0.0, 1.0)));
    }
    return out;
}

} // namespace

GrayImage read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    const bool png = in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
    if (png) return read_png(path);
    in.clear();
    in.seekg(0);
    return read_pgm(in, path);
}

void write_pgm(const GrayImage& img, const std::string& path) {
    img.check();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    const auto bytes = to_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
    img.check();
    const auto bytes = to_bytes(img);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
        throw Error(ErrorCode::Io, std::string("png encoding failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
        throw Error(ErrorCode::Io, std::string("png encoding failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

void write_png(const GrayImage& img, const std::string& path) {
    const auto data = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

// ---------------------------------------------------------------------------
// Gradient

Point GradientField::sample(Point p) const {
    const double u = std::clamp(p.x - 0.5, 0.0, static_cast<double>(width - 1));
    const double v = std::clamp(p.y - 0.5, 0.0, static_cast<double>(height - 1));
    const int c0 = std::min(static_cast<int>(u), width - 1), r0 = std::min(static_cast<int>(v), height - 1);
    const int c1 = std::min(c0 + 1, width - 1), r1 = std::min(r0 + 1, height - 1);
    const double fu = u - c0, fv = v - r0;
    auto lerp = [&](const std::vector<double>& g) {
        const double top = (1 - fu) * g[idx(r0 * width + c0)] + fu * g[idx(r0 * width + c1)];
        const double bot = (1 - fu) * g[idx(r1 * width + c0)] + fu * g[idx(r1 * width + c1)];
        return (1 - fv) * top + fv * bot;
    };
    return {lerp(gx), lerp(gy)};
}

double GradientField::max_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) m = std::max(m, std::hypot(gx[i], gy[i]));
    return m;
}

GradientField GradientField::scaled(double s) const {
    GradientField g = *this;
    for (double& x : g.gx) x /= s;
    for (double& y : g.gy) y /= s;
    return g;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    img.check();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (img.width < 2 || img.height < 2) throw Error(ErrorCode::InvalidArgument, "image must be at least 2 x 2");
    const auto w = gaussian_kernel(sigma);
    const int radius = static_cast<int>(w.size() / 2);
    GrayImage tmp(img.width, img.height), out(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += w[idx(k + radius)] * img.at(r, reflect(c + k, img.width));
            tmp.at(r, c) = s;
        }
    }
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += w[idx(k + radius)] * tmp.at(reflect(r + k, img.height), c);
            out.at(r, c) = s;
        }
    }
    return out;
}

GradientField gradient_field(const GrayImage& img, double sigma) {
    const GrayImage b = gaussian_blur(img, sigma);
    GradientField g;
    g.width = b.width;
    g.height = b.height;
    g.sigma = sigma;
    g.gx.resize(b.intensities.size());
    g.gy.resize(b.intensities.size());
    auto d4 = [](double m2, double m1, double p1, double p2) { return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / 12.0; };
    for (int r = 0; r < b.height; ++r) {
        for (int c = 0; c < b.width; ++c) {
            const auto h = [&](int dc) { return b.at(r, reflect(c + dc, b.width)); };
            const auto v = [&](int dr) { return b.at(reflect(r + dr, b.height), c); };
            g.gx[idx(r * b.width + c)] = d4(h(-2), h(-1), h(1), h(2));
            g.gy[idx(r * b.width + c)] = d4(v(-2), v(-1), v(1), v(2));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Hough

double HoughAccumulator::theta_width() const { return std::numbers::pi / bins.theta; }

Line HoughAccumulator::line_of(int i, int j, int id, double activity) const {
    const double th = theta_of(j), rho = rho_of(i);
    double a = std::cos(th), b = std::sin(th);
    // exact axis directions keep lattice-like families exactly parallel
    if (std::abs(a) < 1e-12) a = 0.0;
    if (std::abs(b) < 1e-12) b = 0.0;
    return Line::from_coefficients(id, a, b, rho + cx * a + cy * b, activity);
}

HoughAccumulator hough_accumulate(const GradientField& grad, HoughBins bins, HoughVoting voting) {
    if (bins.rho < 1 || bins.theta < 1) throw Error(ErrorCode::InvalidArgument, "Hough bins must be positive");
    HoughAccumulator acc;
    acc.bins = bins;
    acc.cx = grad.width / 2.0;
    acc.cy = grad.height / 2.0;
    acc.rho_max = std::hypot(acc.cx, acc.cy);
    acc.votes.assign(idx(bins.rho) * idx(bins.theta), 0.0);
    const double dth = acc.theta_width(), drho = acc.rho_width();
    double mass = 0.0;
    for (int r = 0; r < grad.height; ++r) {
        for (int c = 0; c < grad.width; ++c) {
            const double gx = grad.gx_at(r, c), gy = grad.gy_at(r, c);
            const double m = std::hypot(gx, gy);
            if (!(m > 0.0)) continue;
            auto vote = [&](int j) {
                const double tj = j * dth;
                const double rho = (c + 0.5 - acc.cx) * std::cos(tj) + (r + 0.5 - acc.cy) * std::sin(tj);
                const int i = std::clamp(static_cast<int>(std::floor((rho + acc.rho_max) / drho)), 0, bins.rho - 1);
                acc.votes[idx(i) * idx(bins.theta) + idx(j)] += m;
            };
            if (voting == HoughVoting::Full) {
                for (int j = 0; j < bins.theta; ++j) vote(j);
            } else {
                double th = std::atan2(gy, gx);
                if (th < 0.0) th += std::numbers::pi;
                vote(static_cast<int>(std::lround(th / dth)) % bins.theta);
            }
            mass += m;
        }
    }
    if (!(mass > 0.0)) throw Error(ErrorCode::NoAccumulatorMass, "gradient field is identically zero");
    return acc;
}

std::vector<std::pair<int, int>> hough_peaks(const HoughAccumulator& acc, int n_top, int total) {
    const int nr = acc.bins.rho, nt = acc.bins.theta;
    std::vector<std::pair<int, int>> order;
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nt; ++j) {
            if (acc.at(i, j) > 0.0) order.push_back({i, j});
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](const auto& x, const auto& y) { return acc.at(x.first, x.second) > acc.at(y.first, y.second); });
    std::vector<std::pair<int, int>> picks;
    std::vector<std::uint8_t> taken(acc.votes.size(), 0);
    for (const auto& b : order) {
        if (static_cast<int>(picks.size()) >= std::min(n_top, total)) break;
        picks.push_back(b);
        taken[idx(b.first * nt + b.second)] = 1;
    }
    auto strict_max = [&](int i, int j) {
        const double v = acc.at(i, j);
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                int ii = i + di, jj = j + dj;
                // angle wraps at pi with the offset mirrored
                if (jj < 0 || jj >= nt) {
                    jj = (jj + nt) % nt;
                    ii = nr - 1 - ii;
                }
                if (ii < 0 || ii >= nr) continue;
                if (!(v > acc.at(ii, jj))) return false;
            }
        }
        return true;
    };
    for (const auto& b : order) {
        if (static_cast<int>(picks.size()) >= total) break;
        if (taken[idx(b.first * nt + b.second)] || !strict_max(b.first, b.second)) continue;
        picks.push_back(b);
    }
    return picks;
}

std::vector<Line> regularize_lines(std::vector<Line> lines, const Domain& domain, const RegularizeOptions& opt) {
    auto crosses = [&](const Line& l) {
        double lo = kInfinity, hi = -kInfinity;
        for (const Point& v : domain.vertices()) {
            lo = std::min(lo, l.signed_distance(v));
            hi = std::max(hi, l.signed_distance(v));
        }
        return lo < -opt.separation && hi > opt.separation;
    };
    std::vector<Line> kept;
    const double sin_tol = std::sin(opt.theta_tolerance);
    for (const Line& l : lines) {
        if (!crosses(l)) continue;
        bool dup = false;
        for (const Line& m : kept) {
            const double s = l.a * m.b - l.b * m.a;
            const double same = l.a * m.a + l.b * m.b;
            if (std::abs(s) <= sin_tol + 1e-15 && std::abs(l.c - (same > 0.0 ? m.c : -m.c)) <= opt.rho_tolerance) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(l);
    }
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<int>(i);

    // deterministic nudges +d, -d, +2d, -2d, ... up to max_shift
    const double step = opt.max_shift / 8.0;
    std::vector<int> nudges(kept.size(), 0);
    std::vector<double> base(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) base[i] = kept[i].c;
    auto nudge = [&](std::size_t l) {
        const int n = ++nudges[l];
        const double shift = step * ((n + 1) / 2) * (n % 2 ? 1.0 : -1.0);
        if (std::abs(shift) > opt.max_shift + 1e-12) {
            throw Error(ErrorCode::IrreparableDegeneracy, "line " + std::to_string(l) + " cannot be separated from its neighbours");
        }
        kept[l].c = base[l] + shift;
    };
    auto find_violation = [&]() -> int {
        const std::size_t n = kept.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Line& li = kept[i];
                const Line& lj = kept[j];
                const double det = li.a * lj.b - lj.a * li.b;
                if (std::abs(det) < 1e-14) continue;
                const Point p{(li.c * lj.b - lj.c * li.b) / det, (li.a * lj.c - lj.a * li.c) / det};
                const double d = domain.inside_distance(p);
                if (d < -opt.separation) continue;
                if (std::abs(d) <= opt.separation) return static_cast<int>(j);
                for (std::size_t l = 0; l < n; ++l) {
                    if (l == i || l == j) continue;
                    if (std::abs(kept[l].signed_distance(p)) <= opt.separation) return static_cast<int>(std::max(j, l));
                }
            }
        }
        return -1;
    };
    for (int round = 0;; ++round) {
        const int bad = find_violation();
        if (bad < 0) break;
        if (round >= opt.max_rounds) throw Error(ErrorCode::IrreparableDegeneracy, "no regular perturbation found");
        nudge(static_cast<std::size_t>(bad));
    }
    return kept;
}

TessellationPtr hough_tessellation(const GradientField& grad, HoughBins bins, int n_top, int total, double activity,
                                   HoughVoting voting) {
    if (n_top < 0 || total < 1) throw Error(ErrorCode::InvalidArgument, "line counts must be positive");
    const auto acc = hough_accumulate(grad, bins, voting);
    std::vector<Line> lines;
    for (const auto& [i, j] : hough_peaks(acc, n_top, total)) {
        lines.push_back(acc.line_of(i, j, static_cast<int>(lines.size()), activity));
    }
    const Domain domain = Domain::rectangle(0.0, 0.0, grad.width, grad.height);
    RegularizeOptions opt;
    opt.rho_tolerance = 0.5 * acc.rho_width();
    opt.theta_tolerance = 0.5 * acc.theta_width();
    return build_tessellation(regularize_lines(std::move(lines), domain, opt), domain);
}

// ---------------------------------------------------------------------------
// Flux

double segment_flux(const GradientField& grad, Point from, Point to, FluxMode mode) {
    const double tol = 1e-6;
    for (const Point& p : {from, to}) {
        if (p.x < -tol || p.y < -tol || p.x > grad.width + tol || p.y > grad.height + tol) {
            throw Error(ErrorCode::EdgeOutsideImage, "edge leaves the image at (" + std::to_string(p.x) + ", " +
                                                         std::to_string(p.y) + ")");
        }
    }
    const double len = distance(from, to);
    if (!(len > 0.0)) return 0.0;
    const Point normal{-(to.y - from.y) / len, (to.x - from.x) / len};
    double sum = 0.0;
    sample_along(from, to, 1.0, [&](Point p, double h) {
        const double f = h * dot(grad.sample(p), normal);
        sum += mode == FluxMode::PerStep ? std::abs(f) : f;
    });
    return mode == FluxMode::PerStep ? sum : std::abs(sum);
}

FluxModifier::FluxModifier(GradientField grad, TessellationPtr t, double beta, double c, FluxMode mode)
    : grad_(std::move(grad)), t_(std::move(t)), beta_(beta), c_(c), mode_(mode) {
    if (!(beta > 0.0) || !(c > 0.0) || !std::isfinite(beta) || !std::isfinite(c)) {
        throw Error(ErrorCode::InvalidArgument, "flux coupling and threshold must be positive");
    }
    flux_.resize(t_->segment_count());
    for (std::size_t s = 0; s < flux_.size(); ++s) {
        const auto& seg = t_->segments()[s];
        flux_[s] = segment_flux(grad_, seg.from, seg.to, mode_);
    }
}

double FluxModifier::segment_term(const Tessellation& t, int segment) const {
    const double f = &t == t_.get() ? flux_[idx(segment)]
                                    : segment_flux(grad_, t.segments()[idx(segment)].from, t.segments()[idx(segment)].to, mode_);
    return -beta_ * (f - c_);
}

double FluxModifier::evaluate(const Mosaic& m) const {
    double h = 0.0;
    for (int s : m.active_segments()) h += segment_term(m.tessellation(), s);
    return h;
}

double flux_hamiltonian(const Mosaic& m, const FluxModifier& f) { return f.evaluate(m); }

// ---------------------------------------------------------------------------
// Pipeline

void ExtractionConfig::validate() const {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    if (bins.rho < 1 || bins.theta < 1) throw Error(ErrorCode::InvalidArgument, "Hough bins must be positive");
    if (n_top < 0 || lines < 1 || n_top > lines) throw Error(ErrorCode::InvalidArgument, "need 0 <= top <= lines and lines >= 1");
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
    if (!(alpha_v >= 0.0 && alpha_v <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha_v must lie in [0, 1]");
    if (!(activity > 0.0 && activity < 1.0)) throw Error(ErrorCode::InvalidArgument, "line activity must lie in (0, 1)");
    if (!(beta > 0.0) || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "flux coupling and threshold must be positive");
    if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be non-negative");
    schedule.validate();
}

ExtractionResult extract_network(const GrayImage& img, const ExtractionConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ExtractionResult out{{}, nullptr, Mosaic(build_tessellation({}, Domain::rectangle(0, 0, 1, 1)), cfg.k), 0.0, 0.0, {}};
    GradientField grad;
    try {
        grad = gradient_field(img, cfg.sigma);
    } catch (const Error& e) {
        throw staged("gradient", e);
    }
    const Domain domain = Domain::rectangle(0.0, 0.0, img.width, img.height);
    const double peak = grad.max_magnitude();
    double level = 0.0;
    for (double v : img.intensities) level = std::max(level, std::abs(v));
    // gradients at the rounding level of the intensities count as flat
    if (!(peak > 1e-12 * level)) {
        // flat image: no line carries flux, the empty network is optimal
        out.gradient = grad;
        out.tessellation = build_tessellation({}, domain);
        out.mosaic = Mosaic(out.tessellation, cfg.k);
        return out;
    }
    try {
        out.tessellation = hough_tessellation(grad, cfg.bins, cfg.n_top, cfg.lines, cfg.activity, cfg.voting);
    } catch (const Error& e) {
        throw staged("hough", e);
    }
    switch (cfg.scale) {
    case GradientScale::None: out.gradient = grad; break;
    case GradientScale::Sigma: out.gradient = grad.scaled(1.0 / cfg.sigma); break;
    case GradientScale::Max: out.gradient = grad.scaled(peak); break;
    }
    try {
        const auto p = derive_params(cfg.k, cfg.alpha_v);
        const FluxModifier flux(out.gradient, out.tessellation, cfg.beta, cfg.c, cfg.mode);
        const auto start = ChainState::from_mosaic(Mosaic(out.tessellation, cfg.k));
        auto r = anneal(start, p, flux, cfg.schedule, cfg.tau, seed);
        out.mosaic = std::move(r.best);
        out.score = r.best_score;
        out.trace = std::move(r.trace);
        out.flux_energy = flux_hamiltonian(out.mosaic, flux);
    } catch (const Error& e) {
        throw staged("anneal", e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark

namespace {
constexpr int kBenchSize = 128;
constexpr double kBandCentres[] = {16.0, 48.0, 80.0, 112.0};
constexpr double kBandHalfWidth = 4.0;

bool in_band(double v) {
    for (double c : kBandCentres) {
        if (v >= c - kBandHalfWidth && v < c + kBandHalfWidth) return true;
    }
    return false;
}
} // namespace

GrayImage grid_benchmark_image(double noise_sigma, std::uint64_t seed) {
    GrayImage img(kBenchSize, kBenchSize);
    Stream rng(derive_key(seed, 0x677269642d696d67ULL));
    for (int r = 0; r < kBenchSize; ++r) {
        for (int c = 0; c < kBenchSize; ++c) {
            const double base = in_band(r + 0.5) || in_band(c + 0.5) ? 1.0 : 0.0;
            // Box-Muller keeps the noise identical across standard libraries
            const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            img.at(r, c) = base + noise_sigma * z;
        }
    }
    return img;
}

std::vector<std::pair<Point, Point>> grid_benchmark_truth() {
    std::vector<double> cuts{0.0};
    for (double c : kBandCentres) {
        cuts.push_back(c - kBandHalfWidth);
        cuts.push_back(c + kBandHalfWidth);
    }
    cuts.push_back(kBenchSize);
    std::vector<std::pair<Point, Point>> out;
    for (std::size_t b = 1; b + 1 < cuts.size(); ++b) {
        const double v = cuts[b];
        // dark gaps along the boundary: between consecutive bands and at the ends
        for (std::size_t g = 0; g + 1 < cuts.size(); g += 2) {
            const double lo = cuts[g], hi = cuts[g + 1];
            out.push_back({{lo, v}, {hi, v}});
            out.push_back({{v, lo}, {v, hi}});
        }
    }
    return out;
}

EdgeScore edge_f1(const Mosaic& m, const std::vector<std::pair<Point, Point>>& truth, double tolerance) {
    const auto& t = m.tessellation();
    const auto active = m.active_segments();
    auto near_truth = [&](Point p) {
        for (const auto& [a, b] : truth) {
            if (point_segment_distance(p, a, b) <= tolerance) return true;
        }
        return false;
    };
    auto near_active = [&](Point p) {
        for (int s : active) {
            const auto& seg = t.segments()[idx(s)];
            if (point_segment_distance(p, seg.from, seg.to) <= tolerance) return true;
        }
        return false;
    };
    double hit = 0.0, total = 0.0;
    for (int s : active) {
        const auto& seg = t.segments()[idx(s)];
        sample_along(seg.from, seg.to, 0.5, [&](Point p, double h) {
            total += h;
            if (near_truth(p)) hit += h;
        });
    }
    EdgeScore e;
    e.precision = total > 0.0 ? hit / total : (truth.empty() ? 1.0 : 0.0);
    hit = total = 0.0;
    for (const auto& [a, b] : truth) {
        sample_along(a, b, 0.5, [&](Point p, double h) {
            total += h;
            if (near_active(p)) hit += h;
        });
    }
    e.recall = total > 0.0 ? hit / total : 1.0;
    e.f1 = e.precision + e.recall > 0.0 ? 2.0 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
    return e;
}

} // namespace polyfield
