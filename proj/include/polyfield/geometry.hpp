#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace polyfield {

/// Concurrence / incidence tolerance, in domain units.
inline constexpr double kGeometricTolerance = 1e-9;
/// Fixed rotation of the time axis applied when the unrotated frame is degenerate.
inline constexpr double kCanonicalRotation = 1e-4;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point p, Point q) { return {p.x + q.x, p.y + q.y}; }
inline Point operator-(Point p, Point q) { return {p.x - q.x, p.y - q.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point p, Point q) { return p.x * q.x + p.y * q.y; }
inline double cross(Point p, Point q) { return p.x * q.y - p.y * q.x; }
double distance(Point p, Point q);

/// A straight line a*x + b*y = c in normal form with its activity.
struct Line {
    int id = 0;
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double activity = 0.5;

    /// Normalizes (a, b) to unit length with a > 0, or a == 0 and b > 0.
    /// Throws InvalidArgument for a degenerate normal or an activity outside (0, 1).
    static Line from_coefficients(int id, double a, double b, double c, double activity);

    double signed_distance(Point p) const { return a * p.x + b * p.y - c; }
    /// Unit direction (-b, a).
    Point direction() const { return {-b, a}; }
};

/// Bounded convex polygon with nonempty interior, stored counter-clockwise.
class Domain {
public:
    static Domain rectangle(double x0, double y0, double x1, double y1);
    /// Accepts either orientation; rejects non-convex or degenerate input.
    static Domain polygon(std::vector<Point> vertices);

    const std::vector<Point>& vertices() const { return vertices_; }
    bool is_rectangle() const { return rectangle_; }

    /// Signed distance to the boundary: positive inside, negative outside.
    double inside_distance(Point p) const;
    bool contains(Point p) const { return inside_distance(p) > 0.0; }

    double min_x() const;
    double max_x() const;
    double min_y() const;
    double max_y() const;

private:
    std::vector<Point> vertices_;
    bool rectangle_ = false;
};

enum class EventKind : std::uint8_t { Entry, Node };

/// One chronological event: a boundary entry point (index = line) or an
/// interior node (index = node id).
struct Event {
    EventKind kind = EventKind::Node;
    int index = 0;
    double time = 0.0;
};

/// Intersection of two lines strictly inside the domain. Line slots i/j are
/// ordered so that line_i < line_j.
struct Node {
    Point position;
    double time = 0.0;
    int line_i = -1;
    int line_j = -1;
    int in_i = -1;   ///< segment on line_i arriving at the node
    int in_j = -1;
    int out_i = -1;  ///< segment on line_i leaving the node
    int out_j = -1;
    int left = -1;      ///< cell between the two arriving segments
    int across_i = -1;  ///< cell across in_i from `left`
    int across_j = -1;  ///< cell across in_j from `left`
    int right = -1;     ///< cell between the two leaving segments (born here)
};

/// Entry point in(l, D): the boundary crossing with the smaller time coordinate.
struct Entry {
    Point position;
    double time = 0.0;
    int segment = -1;  ///< first segment of the line
    int prior = -1;    ///< cell lying just before the entry
    int fresh = -1;    ///< cell born at the entry
};

struct Exit {
    Point position;
    double time = 0.0;
    int segment = -1;
};

/// Piece of a line between consecutive crossings. Tail precedes head in time;
/// -1 denotes the boundary.
struct Segment {
    int line = -1;
    int tail_node = -1;
    int head_node = -1;
    Point from;
    Point to;
    double length = 0.0;
    int cell_pos = -1;  ///< cell on the side where signed_distance > 0
    int cell_neg = -1;

    int other_cell(int cell) const { return cell == cell_pos ? cell_neg : cell_pos; }
    bool borders(int cell) const { return cell == cell_pos || cell == cell_neg; }
};

struct Cell {
    std::vector<Point> polygon;
    double birth_time = 0.0;
    /// Event creating the cell; std::nullopt for the initial cell.
    std::optional<Event> birth;
    std::vector<int> segments;
    /// Chronological event positions whose local configuration reads this cell.
    std::vector<int> dependents;
};

struct LatticeShape {
    int rows = 0;
    int cols = 0;
    /// Column-major pixel index; equals the cell id.
    int pixel(int row, int col) const { return col * rows + row; }
};

/// Immutable arrangement of a regular linear tessellation inside a convex
/// domain. Cells are numbered in chronological birth order, nodes in
/// chronological order; for lattices the cell id is the column-major pixel
/// index. Safe to share read-only across threads.
class Tessellation {
public:
    const std::vector<Line>& lines() const { return lines_; }
    const Domain& domain() const { return domain_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<Exit>& exits() const { return exits_; }
    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<Event>& events() const { return events_; }
    /// Segments of one line in time order.
    const std::vector<int>& line_segments(int line) const { return line_segments_[static_cast<std::size_t>(line)]; }

    std::size_t line_count() const { return lines_.size(); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t cell_count() const { return cells_.size(); }
    std::size_t segment_count() const { return segments_.size(); }

    int initial_cell() const { return 0; }
    double rotation() const { return rotation_; }
    double time_of(Point p) const;
    double space_of(Point p) const;

    const std::optional<LatticeShape>& lattice() const { return lattice_; }
    bool is_lattice() const { return lattice_.has_value(); }

    /// Cell containing p, or -1 when p is outside the domain or on a line.
    int locate(Point p) const;

    /// Position of an event in events().
    int event_position(EventKind kind, int index) const;

private:
    friend class TessellationBuilder;

    std::vector<Line> lines_;
    Domain domain_;
    std::vector<Node> nodes_;
    std::vector<Entry> entries_;
    std::vector<Exit> exits_;
    std::vector<Segment> segments_;
    std::vector<Cell> cells_;
    std::vector<Event> events_;
    std::vector<std::vector<int>> line_segments_;
    std::vector<int> entry_event_pos_;
    std::vector<int> node_event_pos_;
    double rotation_ = 0.0;
    std::optional<LatticeShape> lattice_;
    std::map<std::vector<std::uint64_t>, int> cell_index_;
};

using TessellationPtr = std::shared_ptr<const Tessellation>;

/// Validates the line family against the domain and computes the arrangement.
/// Throws ThreeConcurrentLines, LineMissesDomain, NodeOnBoundary,
/// TieBreakFailure or InvalidArgument.
TessellationPtr build_tessellation(std::vector<Line> lines, Domain domain);

/// Axis-parallel lattice for a rows x cols pixel rectangle [0, cols] x [0, rows].
/// Lines are indexed horizontals first (between rows r-1 and r, r = 1..rows-1),
/// then verticals (between columns c-1 and c, c = 1..cols-1). `activities`
/// must have rows + cols - 2 entries.
TessellationPtr build_lattice(int rows, int cols, std::span<const double> activities);
TessellationPtr build_lattice(int rows, int cols, double activity);

/// Entry points and interior nodes in strictly increasing time order.
std::vector<Event> chronological_events(const Tessellation& t);

} // namespace polyfield
