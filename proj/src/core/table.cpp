#include "table.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace hypb {

BilliardTable::BilliardTable(std::string name, std::shared_ptr<const MetricField> metric,
                             std::vector<std::shared_ptr<const Wall>> walls)
    : name_(std::move(name)), metric_(std::move(metric)), walls_(std::move(walls)) {
    if (!metric_) fail(ErrorCode::invalid_argument, "table requires a metric");

    double lx = metric_->period_x();
    double ly = metric_->period_y();
    double margin = 0.25 * std::min(lx, ly);
    offsets_.resize(walls_.size());
    for (std::size_t w = 0; w < walls_.size(); ++w) {
        Vec2 bc = walls_[w]->bounding_center();
        double br = walls_[w]->bounding_radius();
        if (2.0 * br >= std::min(lx, ly))
            fail(ErrorCode::invalid_argument, "wall spans more than one fundamental domain");
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                Vec2 c{bc.x + i * lx, bc.y + j * ly};
                double dx = std::max({0.0 - c.x, 0.0, c.x - lx});
                double dy = std::max({0.0 - c.y, 0.0, c.y - ly});
                if (std::hypot(dx, dy) <= br + margin)
                    offsets_[w].push_back({i * lx, j * ly});
            }
        }
    }
    validate();
}

double BilliardTable::wall_signed_distance(std::size_t w, const Vec2& p, Vec2* offset_out) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& o : offsets_[w]) {
        double d = walls_[w]->signed_distance_raw(p - o);
        if (d < best) {
            best = d;
            if (offset_out) *offset_out = o;
        }
    }
    return best;
}

double BilliardTable::wall_proxy(std::size_t w, const Vec2& p, Vec2* offset_out) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& o : offsets_[w]) {
        double d = walls_[w]->proxy_raw(p - o);
        if (d < best) {
            best = d;
            if (offset_out) *offset_out = o;
        }
    }
    return best;
}

double BilliardTable::signed_distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    Vec2 q = metric_->wrap(p);
    for (std::size_t w = 0; w < walls_.size(); ++w)
        best = std::min(best, wall_signed_distance(w, q));
    return best;
}

DispersingReport BilliardTable::is_dispersing(int samples_per_wall) const {
    if (samples_per_wall < 1) fail(ErrorCode::invalid_argument, "samples must be >= 1");
    DispersingReport rep;
    if (walls_.empty()) return rep;  // vacuous
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& wall : walls_) {
        double len = wall->length();
        for (int i = 0; i < samples_per_wall; ++i) {
            double kappa = wall->frame(len * i / samples_per_wall).kappa;
            worst = std::max(worst, kappa);
        }
    }
    rep.worst_kappa = worst;
    rep.dispersing = worst < 0.0;
    return rep;
}

void BilliardTable::validate() const {
    const int samples = 256;
    const double min_gap = 1e-6;

    // Pairwise disjointness, including each wall against its own periodic
    // copies. Sample points on wall a, exact signed distance to wall b
    // copies; a negative value means interpenetration.
    for (std::size_t a = 0; a < walls_.size(); ++a) {
        double len = walls_[a]->length();
        for (int i = 0; i < samples; ++i) {
            Vec2 p = metric_->wrap(walls_[a]->position(len * i / samples));
            for (std::size_t b = 0; b < walls_.size(); ++b) {
                for (const Vec2& o : offsets_[b]) {
                    double d = walls_[b]->signed_distance_raw(p - o);
                    // The copy p itself lies on (identity or wrapped image).
                    if (a == b && std::abs(d) < 1e-9) continue;
                    if (d <= min_gap)
                        fail(ErrorCode::invalid_argument,
                             "walls intersect or nearly touch (sampled gap <= 1e-6)");
                }
            }
        }
    }

    // Interior must be nonempty.
    if (!walls_.empty()) {
        const int grid = 32;
        bool found = false;
        for (int i = 0; i < grid && !found; ++i)
            for (int j = 0; j < grid && !found; ++j) {
                Vec2 p{metric_->period_x() * (i + 0.5) / grid,
                       metric_->period_y() * (j + 0.5) / grid};
                if (signed_distance(p) > 1e-3) found = true;
            }
        if (!found) fail(ErrorCode::invalid_argument, "billiard interior is empty");
    }
}

}  // namespace hypb
