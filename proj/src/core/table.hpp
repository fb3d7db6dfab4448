#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metric.hpp"
#include "wall.hpp"

namespace hypb {

struct DispersingReport {
    bool dispersing = true;
    // Largest sampled kappa; empty when the table has no walls (vacuous).
    std::optional<double> worst_kappa;
};

// Immutable billiard table: a conformal torus metric plus disjoint obstacle
// walls. Positions are kept in representative coordinates; walls are tested
// against the periodic copies that can reach the fundamental domain.
class BilliardTable {
public:
    BilliardTable(std::string name, std::shared_ptr<const MetricField> metric,
                  std::vector<std::shared_ptr<const Wall>> walls);

    const std::string& name() const { return name_; }
    const MetricField& metric() const { return *metric_; }
    std::shared_ptr<const MetricField> metric_ptr() const { return metric_; }
    std::size_t wall_count() const { return walls_.size(); }
    const Wall& wall(std::size_t i) const { return *walls_[i]; }
    bool is_flat() const { return metric_->is_flat(); }

    // Offsets of the periodic copies of wall w that can approach the
    // fundamental domain.
    const std::vector<Vec2>& wall_offsets(std::size_t w) const { return offsets_[w]; }

    // Signed chart distance from p (wrapped) to wall w over its periodic
    // copies; optionally reports the offset of the nearest copy.
    double wall_signed_distance(std::size_t w, const Vec2& p, Vec2* offset_out = nullptr) const;

    // Cheap same-sign proxy for the collision scan.
    double wall_proxy(std::size_t w, const Vec2& p, Vec2* offset_out = nullptr) const;

    // Min over walls; +inf for a wall-free table.
    double signed_distance(const Vec2& p) const;

    DispersingReport is_dispersing(int samples_per_wall = 256) const;

private:
    std::string name_;
    std::shared_ptr<const MetricField> metric_;
    std::vector<std::shared_ptr<const Wall>> walls_;
    std::vector<std::vector<Vec2>> offsets_;

    void validate() const;
};

// Parses the table definition format:
//   name = my-table
//   metric.period_x = 1.0
//   metric.period_y = 1.0
//   metric.phi_modes = [(kx, ky, amp_cos, amp_sin), ...]
//   walls = [{type=circle, center=(x, y), radius=R},
//            {type=spline, points=[(x, y), ...]}]
// Parse errors name the offending key.
std::shared_ptr<const BilliardTable> parse_table(const std::string& text,
                                                 const std::string& fallback_name = "table");
std::shared_ptr<const BilliardTable> load_table(const std::string& path);

struct Scenario {
    std::string name;
    std::string description;
    std::string definition;
};

// Built-in scenario catalog (embedded definitions).
const std::vector<Scenario>& builtin_scenarios();

// Resolves either a built-in scenario name or a filesystem path.
std::shared_ptr<const BilliardTable> resolve_table(const std::string& name_or_path);

}  // namespace hypb
