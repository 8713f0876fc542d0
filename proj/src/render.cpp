#include "polyfield/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                                  "#b07aa1", "#76b7b2", "#edc948", "#9c755f"};

// Integer hundredths keep the output independent of float formatting.
long long fixed(double v) { return std::llround(v * 100.0); }

void put(std::ostringstream& os, Point p) { os << fixed(p.x) << ',' << fixed(p.y); }

} // namespace

std::string base64(const std::vector<std::uint8_t>& bytes) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) v |= bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? kAlphabet[v & 63] : '=';
    }
    return out;
}

std::string render_svg(const Mosaic& m, const SvgOptions& opt) {
    const Tessellation& t = m.tessellation();
    const Domain& d = t.domain();
    const double w = d.max_x() - d.min_x(), h = d.max_y() - d.min_y();
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << std::llround(w * opt.scale) << "\" height=\""
       << std::llround(h * opt.scale) << "\" viewBox=\"" << fixed(d.min_x()) << ' ' << fixed(d.min_y()) << ' '
       << fixed(w) << ' ' << fixed(h) << "\">\n";

    if (opt.background) {
        // Image pixel (r, c) spans [c, c+1] x [r, r+1] in domain units.
        os << "<image x=\"0\" y=\"0\" width=\"" << fixed(opt.background->width) << "\" height=\""
           << fixed(opt.background->height) << "\" preserveAspectRatio=\"none\" style=\"image-rendering:pixelated\" "
           << "href=\"data:image/png;base64," << base64(encode_png(*opt.background)) << "\"/>\n";
    }

    os << "<path d=\"M";
    for (std::size_t i = 0; i < d.vertices().size(); ++i) {
        if (i) os << " L";
        put(os, d.vertices()[i]);
    }
    os << " Z\" fill=\"none\" stroke=\"#000000\" stroke-width=\"10\"/>\n";

    if (opt.fill) {
        // One path per face, its cells as subpaths; faces are visited from
        // their lowest cell id so the order is fixed.
        std::vector<char> seen(t.cell_count(), 0);
        const double opacity = opt.background ? 0.35 : 0.8;
        for (std::size_t c = 0; c < t.cell_count(); ++c) {
            if (seen[c]) continue;
            const auto face = face_cells(m, static_cast<int>(c));
            os << "<path d=\"";
            bool first = true;
            for (int cell : face) {
                seen[static_cast<std::size_t>(cell)] = 1;
                const auto& poly = t.cells()[static_cast<std::size_t>(cell)].polygon;
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    os << (i == 0 ? (first ? "M" : " M") : " L");
                    put(os, poly[i]);
                }
                os << " Z";
                first = false;
            }
            const Colour col = m.colour(static_cast<int>(c));
            os << "\" fill=\"" << kPalette[static_cast<std::size_t>(col - 1) % kPalette.size()]
               << "\" fill-opacity=\"" << opacity << "\" stroke=\"none\"/>\n";
        }
    }

    const auto st = analyze(m);
    for (const auto& e : st.edges) {
        os << "<polyline points=\"";
        const auto& first = t.segments()[static_cast<std::size_t>(e.segments.front())];
        put(os, first.from);
        for (int s : e.segments) {
            os << ' ';
            put(os, t.segments()[static_cast<std::size_t>(s)].to);
        }
        os << "\" fill=\"none\" stroke=\"#d00000\" stroke-width=\"20\" stroke-linecap=\"round\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

GrayImage render_raster(const Mosaic& m, int scale) {
    if (scale < 1) throw Error(ErrorCode::InvalidArgument, "raster scale must be >= 1");
    const Domain& d = m.tessellation().domain();
    const int w = static_cast<int>(std::ceil((d.max_x() - d.min_x()) * scale));
    const int h = static_cast<int>(std::ceil((d.max_y() - d.min_y()) * scale));
    // -1 outside the domain or exactly on a line.
    std::vector<int> colour(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const Point p{d.min_x() + (c + 0.5) / scale, d.min_y() + (r + 0.5) / scale};
            const int cell = m.tessellation().locate(p);
            colour[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)] =
                cell < 0 ? -1 : m.colour(cell);
        }
    }
    GrayImage img(w, h, 1.0);
    const auto at = [&](int r, int c) { return colour[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)]; };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int v = at(r, c);
            if (v < 0) {
                img.at(r, c) = d.contains({d.min_x() + (c + 0.5) / scale, d.min_y() + (r + 0.5) / scale}) ? 0.0 : 1.0;
                continue;
            }
            const bool border = (c + 1 < w && at(r, c + 1) >= 0 && at(r, c + 1) != v) ||
                                (r + 1 < h && at(r + 1, c) >= 0 && at(r + 1, c) != v);
            img.at(r, c) = border ? 0.0 : 0.25 + 0.7 * (v - 1) / std::max(1, m.k() - 1);
        }
    }
    return img;
}

} // namespace polyfield
