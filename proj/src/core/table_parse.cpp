#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"
#include "table.hpp"

namespace hypb {

namespace {

// Small value tree for the table definition format.
struct Value {
    enum class Kind { number, atom, list, dict } kind = Kind::number;
    double num = 0.0;
    std::string atom;
    std::vector<Value> items;                          // list and tuples
    std::vector<std::pair<std::string, Value>> entries;  // dict
};

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::vector<std::pair<std::string, Value>> parse_document() {
        std::vector<std::pair<std::string, Value>> out;
        skip_ws();
        while (!eof()) {
            std::string key = parse_key_path();
            current_key_ = key;
            expect('=');
            out.emplace_back(key, parse_value());
            skip_ws();
        }
        return out;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::string current_key_;

    [[noreturn]] void error(const std::string& msg) const {
        std::string where = current_key_.empty() ? "input" : "key '" + current_key_ + "'";
        fail(ErrorCode::parse, "table definition: " + msg + " (at " + where + ")");
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }

    void skip_ws() {
        while (!eof()) {
            char c = text_[pos_];
            if (c == '#') {
                while (!eof() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string parse_ident() {
        skip_ws();
        std::size_t start = pos_;
        while (!eof() && ident_char(text_[pos_])) ++pos_;
        if (pos_ == start) error("expected an identifier");
        return text_.substr(start, pos_ - start);
    }

    std::string parse_key_path() {
        std::string key = parse_ident();
        while (accept('.')) key += "." + parse_ident();
        return key;
    }

    Value parse_value() {
        skip_ws();
        char c = peek();
        if (c == '[') return parse_list();
        if (c == '(') return parse_tuple();
        if (c == '{') return parse_dict();
        if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c)))
            return parse_number();
        Value v;
        v.kind = Value::Kind::atom;
        v.atom = parse_ident();
        return v;
    }

    Value parse_number() {
        skip_ws();
        const char* start = text_.c_str() + pos_;
        char* end = nullptr;
        double x = std::strtod(start, &end);
        if (end == start) error("expected a number");
        // An identifier starting with a digit-ish prefix is malformed.
        pos_ += static_cast<std::size_t>(end - start);
        if (!eof() && ident_char(text_[pos_])) error("malformed number");
        Value v;
        v.kind = Value::Kind::number;
        v.num = x;
        return v;
    }

    Value parse_list() {
        expect('[');
        Value v;
        v.kind = Value::Kind::list;
        if (accept(']')) return v;
        for (;;) {
            v.items.push_back(parse_value());
            if (accept(']')) return v;
            expect(',');
            // trailing comma
            if (accept(']')) return v;
        }
    }

    Value parse_tuple() {
        expect('(');
        Value v;
        v.kind = Value::Kind::list;
        if (accept(')')) return v;
        for (;;) {
            v.items.push_back(parse_value());
            if (accept(')')) return v;
            expect(',');
            if (accept(')')) return v;
        }
    }

    Value parse_dict() {
        expect('{');
        Value v;
        v.kind = Value::Kind::dict;
        if (accept('}')) return v;
        for (;;) {
            std::string key = parse_ident();
            expect('=');
            v.entries.emplace_back(key, parse_value());
            if (accept('}')) return v;
            expect(',');
            if (accept('}')) return v;
        }
    }
};

double require_number(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::number)
        fail(ErrorCode::parse, "table definition: key '" + key + "' must be a number");
    return v.num;
}

int require_int(const Value& v, const std::string& key) {
    double x = require_number(v, key);
    if (x != std::floor(x))
        fail(ErrorCode::parse, "table definition: key '" + key + "' must be an integer");
    return static_cast<int>(x);
}

Vec2 require_pair(const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::list || v.items.size() != 2)
        fail(ErrorCode::parse, "table definition: key '" + key + "' must be a pair (x, y)");
    return {require_number(v.items[0], key), require_number(v.items[1], key)};
}

}  // namespace

std::shared_ptr<const BilliardTable> parse_table(const std::string& text,
                                                 const std::string& fallback_name) {
    Parser parser(text);
    auto doc = parser.parse_document();

    std::string name = fallback_name;
    double period_x = 0.0, period_y = 0.0;
    bool saw_px = false, saw_py = false;
    std::vector<PhiMode> modes;
    const Value* walls_value = nullptr;

    for (const auto& [key, value] : doc) {
        if (key == "name") {
            if (value.kind == Value::Kind::atom)
                name = value.atom;
            else
                fail(ErrorCode::parse, "table definition: key 'name' must be a word");
        } else if (key == "metric.period_x") {
            period_x = require_number(value, key);
            saw_px = true;
        } else if (key == "metric.period_y") {
            period_y = require_number(value, key);
            saw_py = true;
        } else if (key == "metric.phi_modes") {
            if (value.kind != Value::Kind::list)
                fail(ErrorCode::parse, "table definition: key 'metric.phi_modes' must be a list");
            for (const Value& item : value.items) {
                if (item.kind != Value::Kind::list || item.items.size() != 4)
                    fail(ErrorCode::parse,
                         "table definition: key 'metric.phi_modes' entries must be "
                         "(kx, ky, amplitude_cos, amplitude_sin)");
                PhiMode m;
                m.kx = require_int(item.items[0], key);
                m.ky = require_int(item.items[1], key);
                m.amp_cos = require_number(item.items[2], key);
                m.amp_sin = require_number(item.items[3], key);
                modes.push_back(m);
            }
        } else if (key == "walls") {
            if (value.kind != Value::Kind::list)
                fail(ErrorCode::parse, "table definition: key 'walls' must be a list");
            walls_value = &value;
        } else {
            fail(ErrorCode::parse, "table definition: unknown key '" + key + "'");
        }
    }

    if (!saw_px) fail(ErrorCode::parse, "table definition: missing key 'metric.period_x'");
    if (!saw_py) fail(ErrorCode::parse, "table definition: missing key 'metric.period_y'");

    auto metric = std::make_shared<const MetricField>(period_x, period_y, std::move(modes));

    std::vector<std::shared_ptr<const Wall>> walls;
    if (walls_value) {
        for (std::size_t i = 0; i < walls_value->items.size(); ++i) {
            const Value& entry = walls_value->items[i];
            std::string key = "walls[" + std::to_string(i) + "]";
            if (entry.kind != Value::Kind::dict)
                fail(ErrorCode::parse, "table definition: " + key + " must be {...}");
            std::map<std::string, const Value*> fields;
            for (const auto& [k, v] : entry.entries) fields[k] = &v;
            auto type_it = fields.find("type");
            if (type_it == fields.end() || type_it->second->kind != Value::Kind::atom)
                fail(ErrorCode::parse, "table definition: " + key + " needs type=circle|spline");
            const std::string& type = type_it->second->atom;
            if (type == "circle") {
                auto c = fields.find("center");
                auto r = fields.find("radius");
                if (c == fields.end() || r == fields.end())
                    fail(ErrorCode::parse,
                         "table definition: " + key + " needs center=(x,y) and radius=R");
                walls.push_back(std::make_shared<CircleWall>(
                    metric, require_pair(*c->second, key + ".center"),
                    require_number(*r->second, key + ".radius")));
            } else if (type == "spline") {
                auto pts = fields.find("points");
                if (pts == fields.end() || pts->second->kind != Value::Kind::list)
                    fail(ErrorCode::parse, "table definition: " + key + " needs points=[(x,y),...]");
                std::vector<Vec2> points;
                for (const Value& p : pts->second->items)
                    points.push_back(require_pair(p, key + ".points"));
                walls.push_back(std::make_shared<SplineWall>(metric, std::move(points)));
            } else {
                fail(ErrorCode::parse,
                     "table definition: " + key + " has unknown type '" + type + "'");
            }
        }
    }

    return std::make_shared<const BilliardTable>(name, metric, std::move(walls));
}

std::shared_ptr<const BilliardTable> load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::parse, "cannot open table file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string stem = path;
    auto slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return parse_table(ss.str(), stem);
}

namespace {

std::string spline_circle_points(Vec2 center, double radius, int n) {
    char buf[64];
    std::string out = "[";
    for (int i = 0; i < n; ++i) {
        double a = 6.283185307179586 * i / n;
        std::snprintf(buf, sizeof buf, "(%.12f, %.12f)", center.x + radius * std::cos(a),
                      center.y + radius * std::sin(a));
        out += buf;
        if (i + 1 < n) out += ", ";
    }
    out += "]";
    return out;
}

std::vector<Scenario> make_builtins() {
    std::vector<Scenario> out;
    out.push_back({"sinai-two-disk", "flat unit torus, disks of radius 0.3 at (0,0) and (0.5,0.5)",
                   "name = sinai-two-disk\n"
                   "metric.period_x = 1.0\n"
                   "metric.period_y = 1.0\n"
                   "walls = [{type=circle, center=(0.0, 0.0), radius=0.3},\n"
                   "         {type=circle, center=(0.5, 0.5), radius=0.3}]\n"});
    out.push_back({"sinai-one-disk", "flat unit torus, single disk of radius 0.3 at (0.5,0.5)",
                   "name = sinai-one-disk\n"
                   "metric.period_x = 1.0\n"
                   "metric.period_y = 1.0\n"
                   "walls = [{type=circle, center=(0.5, 0.5), radius=0.3}]\n"});
    out.push_back({"flat-empty", "flat unit torus without walls",
                   "name = flat-empty\n"
                   "metric.period_x = 1.0\n"
                   "metric.period_y = 1.0\n"});
    out.push_back({"curved-bump",
                   "conformal bump metric with a spline obstacle of radius 0.2 at (0.5,0.5)",
                   "name = curved-bump\n"
                   "metric.period_x = 1.0\n"
                   "metric.period_y = 1.0\n"
                   "# phi = 0.05 cos(2 pi x) cos(2 pi y) written as two product modes:\n"
                   "# cos a cos b = (cos(a+b) + cos(a-b)) / 2\n"
                   "metric.phi_modes = [(1, 1, 0.025, 0.0), (1, -1, 0.025, 0.0)]\n"
                   "walls = [{type=spline, points=" +
                       spline_circle_points({0.5, 0.5}, 0.2, 48) + "}]\n"});
    return out;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> scenarios = make_builtins();
    return scenarios;
}

std::shared_ptr<const BilliardTable> resolve_table(const std::string& name_or_path) {
    for (const Scenario& s : builtin_scenarios()) {
        if (s.name == name_or_path) return parse_table(s.definition, s.name);
    }
    return load_table(name_or_path);
}

}  // namespace hypb
