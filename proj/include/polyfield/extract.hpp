#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyfield/geometry.hpp"
#include "polyfield/mcmc.hpp"
#include "polyfield/model.hpp"
#include "polyfield/mosaic.hpp"

namespace polyfield {

/// Row-major grey levels. Pixel (r, c) covers [c, c+1] x [r, r+1] in domain
/// coordinates, so its centre is (c + 0.5, r + 0.5).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> intensities;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double& at(int r, int c) { return intensities[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)]; }
    double at(int r, int c) const { return intensities[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)]; }
    /// Throws InvalidArgument on inconsistent sizes or non-finite values.
    void check() const;
};

/// Reads binary PGM (P5, 8 or 16 bit) or PNG, scaled to [0, 1]. Throws Io/Parse.
GrayImage read_image(const std::string& path);
void write_pgm(const GrayImage& img, const std::string& path);
/// 8-bit grey PNG of intensities clamped to [0, 1].
void write_png(const GrayImage& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const GrayImage& img);

struct GradientField {
    int width = 0;
    int height = 0;
    double sigma = 0.0;
    std::vector<double> gx;
    std::vector<double> gy;

    double gx_at(int r, int c) const { return gx[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)]; }
    double gy_at(int r, int c) const { return gy[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c)]; }
    /// Bilinear interpolation between pixel centres, clamped at the border.
    Point sample(Point p) const;
    double max_magnitude() const;
    /// Copy with every vector divided by `s`.
    GradientField scaled(double s) const;
};

/// Separable Gaussian blur (truncated at 4 sigma, mirrored border) followed by
/// fourth-order central differences. Throws InvalidArgument for sigma <= 0 or
/// an image smaller than 2 x 2.
GrayImage gaussian_blur(const GrayImage& img, double sigma);
GradientField gradient_field(const GrayImage& img, double sigma);

struct HoughBins {
    int rho = 80;
    int theta = 80;
};

enum class HoughVoting : std::uint8_t {
    Oriented,  ///< one vote at the pixel's own gradient direction
    Full,      ///< one vote per angle bin, along the pixel's sinusoid
};

/// Accumulator over (offset, angle). Angle bin j has centre j*pi/n_theta;
/// offsets are measured from the image centre over [-R, R], R the half diagonal.
struct HoughAccumulator {
    HoughBins bins;
    double rho_max = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    std::vector<double> votes;  ///< row-major in (rho, theta)

    double at(int i, int j) const { return votes[static_cast<std::size_t>(i) * static_cast<std::size_t>(bins.theta) + static_cast<std::size_t>(j)]; }
    double rho_width() const { return 2.0 * rho_max / bins.rho; }
    double theta_width() const;
    double rho_of(int i) const { return -rho_max + (i + 0.5) * rho_width(); }
    double theta_of(int j) const { return j * theta_width(); }
    /// Line a x + b y = c through bin (i, j), in domain coordinates.
    Line line_of(int i, int j, int id, double activity) const;
};

/// Each pixel votes its gradient magnitude. Throws NoAccumulatorMass when the
/// field is identically zero.
HoughAccumulator hough_accumulate(const GradientField& grad, HoughBins bins,
                                  HoughVoting voting = HoughVoting::Oriented);

/// Bin picks in rank order: the `n_top` largest bins, then strict
/// 8-neighbourhood maxima by decreasing vote until `total` picks. Angle wraps
/// with the offset mirrored.
std::vector<std::pair<int, int>> hough_peaks(const HoughAccumulator& acc, int n_top, int total);

struct RegularizeOptions {
    double rho_tolerance = 0.5;    ///< duplicates: offsets closer than this ...
    double theta_tolerance = 0.0;  ///< ... and angles closer than this (radians)
    double separation = 1e-3;      ///< minimum node-to-line and node-to-boundary distance
    double max_shift = 1.0;        ///< total offset perturbation allowed per line
    int max_rounds = 200;
};

/// Drops near-duplicate lines and lines missing the domain, then nudges offsets
/// until no three lines meet and no node touches the boundary. Lines keep
/// their order and are renumbered from 0. Throws IrreparableDegeneracy.
std::vector<Line> regularize_lines(std::vector<Line> lines, const Domain& domain,
                                   const RegularizeOptions& opt = {});

/// Full Hough stage; `total` counts the n_top picks. Throws NoAccumulatorMass.
TessellationPtr hough_tessellation(const GradientField& grad, HoughBins bins, int n_top, int total,
                                   double activity = 0.5, HoughVoting voting = HoughVoting::Oriented);

enum class FluxMode : std::uint8_t {
    PerStep,     ///< sum of |grad . n| over unit steps
    Integrated,  ///< |sum of grad . n| over unit steps
};

/// Integrated normal flux along a straight piece, by midpoint steps of at most
/// one pixel. Throws EdgeOutsideImage.
double segment_flux(const GradientField& grad, Point from, Point to, FluxMode mode = FluxMode::PerStep);

/// H = -beta * sum over active segments of (flux - c). Per-segment terms are
/// cached for one tessellation.
class FluxModifier final : public GibbsModifier {
public:
    FluxModifier(GradientField grad, TessellationPtr t, double beta, double c, FluxMode mode = FluxMode::PerStep);

    double evaluate(const Mosaic& m) const override;
    bool segment_local() const override { return true; }
    double segment_term(const Tessellation& t, int segment) const override;

    double flux(int segment) const { return flux_[static_cast<std::size_t>(segment)]; }
    const GradientField& gradient() const { return grad_; }
    double beta() const { return beta_; }
    double c() const { return c_; }

private:
    GradientField grad_;
    TessellationPtr t_;
    double beta_;
    double c_;
    FluxMode mode_;
    std::vector<double> flux_;
};

double flux_hamiltonian(const Mosaic& m, const FluxModifier& f);

enum class GradientScale : std::uint8_t {
    None,   ///< raw intensity gradient
    Sigma,  ///< scale-normalized: sigma * gradient
    Max,    ///< divided by the largest magnitude
};

struct ExtractionConfig {
    double sigma = 3.0;
    HoughBins bins{80, 80};
    HoughVoting voting = HoughVoting::Oriented;
    int n_top = 8;
    int lines = 42;
    int k = 4;
    double alpha_v = 0.5;
    double activity = 0.5;
    double beta = 1.0;  ///< flux coupling
    double c = 2.0;
    double tau = 100.0;
    AnnealSchedule schedule{0.1, 100.0, 0.0, 500};
    FluxMode mode = FluxMode::PerStep;
    GradientScale scale = GradientScale::Max;

    void validate() const;
};

struct ExtractionResult {
    GradientField gradient;  ///< as scored, after scaling
    TessellationPtr tessellation;
    Mosaic mosaic;
    double score = 0.0;
    double flux_energy = 0.0;
    std::vector<TracePoint> trace;
};

/// Gradient, Hough lines, then annealing from the monochrome mosaic. Stage
/// failures are rethrown with the stage name prefixed.
ExtractionResult extract_network(const GrayImage& img, const ExtractionConfig& cfg, std::uint64_t seed);

// Benchmark helpers ----------------------------------------------------------

/// 128 x 128 image: four horizontal and four vertical bright bands (value 1,
/// width 8, centred at 16, 48, 80, 112) on 0, plus Gaussian noise.
GrayImage grid_benchmark_image(double noise_sigma, std::uint64_t seed);

/// Boundary of the bright set of the benchmark image, as axis-parallel pieces.
std::vector<std::pair<Point, Point>> grid_benchmark_truth();

struct EdgeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Length-weighted precision and recall of the active segments against
/// `truth`, each side sampled every half pixel, a sample matching when it lies
/// within `tolerance` of the other set.
EdgeScore edge_f1(const Mosaic& m, const std::vector<std::pair<Point, Point>>& truth, double tolerance);

} // namespace polyfield
