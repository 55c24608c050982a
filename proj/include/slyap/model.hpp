#pragma once

// Domain types for block systems and switching signals, validation, and the
// on-disk JSON formats.

#include "slyap/matkit.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

namespace slyap {

using json = nlohmann::json;

/// One mode (A B; C D) of the block system: A is n x n, B n x m, C m x n,
/// D m x m. Units of all entries are 1/time.
struct BlockMode {
    Matrix A, B, C, D;
};

/// Compact (finite) mode set with slow dimension n and fast dimension m.
struct BlockSystem {
    int n = 0;
    int m = 0;
    std::vector<BlockMode> modes;
};

struct PwcPiece {
    int mode = 0;
    double dwell = 0.0;
};

/// Piecewise-constant switching signal over a mode list.
struct PwcSignal {
    std::vector<PwcPiece> pieces;

    double total_duration() const {
        double t = 0.0;
        for (const auto& p : pieces) t += p.dwell;
        return t;
    }
};

/// Flow decay data |Phi(t,s)| <= c e^{-delta (t-s)}.
struct DecayEstimate {
    double c = 1.0;        // overshoot, >= 1
    double delta = 0.0;    // decay rate, > 0 when meaningful
    std::string method;    // "log-norm" or "decay-fit"
};

struct Violation {
    int mode = -1;             // -1: system-level
    std::string field;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(format(violations)), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string s = "invalid system:";
        for (const auto& v : vs) {
            s += "\n  ";
            if (v.mode >= 0) s += "mode " + std::to_string(v.mode) + ", field " + v.field + ": ";
            s += v.message;
        }
        return s;
    }
    std::vector<Violation> violations_;
};

namespace detail {

inline std::optional<Matrix> parse_matrix(const json& j, long rows, long cols,
                                          int mode, const char* field,
                                          std::vector<Violation>& out) {
    if (!j.is_array() || (long)j.size() != rows) {
        out.push_back({mode, field, "expected " + std::to_string(rows) + " rows"});
        return std::nullopt;
    }
    Matrix M(rows, cols);
    for (long r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || (long)row.size() != cols) {
            out.push_back({mode, field, "row " + std::to_string(r) + ": expected " +
                                            std::to_string(cols) + " entries"});
            return std::nullopt;
        }
        for (long c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                out.push_back({mode, field, "non-numeric entry"});
                return std::nullopt;
            }
            M(r, c) = row[c].get<double>();
        }
    }
    if (!is_finite(M)) {
        out.push_back({mode, field, "non-finite entry"});
        return std::nullopt;
    }
    return M;
}

inline json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (long r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

struct ValidationResult {
    std::optional<BlockSystem> system;
    std::vector<Violation> violations;
    bool ok() const { return system.has_value(); }
};

/// Checks a parsed system description against the schema
/// { "n": int, "m": int, "modes": [ {"A":[[..]],"B":..,"C":..,"D":..}, .. ] }.
inline ValidationResult try_validate_system(const json& raw) {
    ValidationResult res;
    std::vector<Violation>& vs = res.violations;
    if (!raw.is_object()) {
        vs.push_back({-1, "", "top-level value must be an object"});
        return res;
    }
    if (!raw.contains("n") || !raw["n"].is_number_integer() || raw["n"].get<int>() <= 0)
        vs.push_back({-1, "n", "n must be a positive integer"});
    if (!raw.contains("m") || !raw["m"].is_number_integer() || raw["m"].get<int>() <= 0)
        vs.push_back({-1, "m", "m must be a positive integer"});
    if (!raw.contains("modes") || !raw["modes"].is_array())
        vs.push_back({-1, "modes", "modes must be an array"});
    if (!vs.empty()) return res;

    BlockSystem sys;
    sys.n = raw["n"].get<int>();
    sys.m = raw["m"].get<int>();
    if (raw["modes"].empty()) {
        vs.push_back({-1, "modes", "empty mode set"});
        return res;
    }
    int idx = 0;
    for (const auto& jm : raw["modes"]) {
        BlockMode mode;
        bool any = false;
        auto grab = [&](const char* f, long r, long c) -> Matrix {
            if (!jm.is_object() || !jm.contains(f)) {
                vs.push_back({idx, f, "missing"});
                any = true;
                return Matrix::Zero(r, c);
            }
            auto M = detail::parse_matrix(jm[f], r, c, idx, f, vs);
            if (!M) {
                any = true;
                return Matrix::Zero(r, c);
            }
            return *M;
        };
        mode.A = grab("A", sys.n, sys.n);
        mode.B = grab("B", sys.n, sys.m);
        mode.C = grab("C", sys.m, sys.n);
        mode.D = grab("D", sys.m, sys.m);
        if (!any) sys.modes.push_back(std::move(mode));
        ++idx;
    }
    if (!vs.empty()) return res;
    res.system = std::move(sys);
    return res;
}

/// Throwing form of try_validate_system.
inline BlockSystem validate_system(const json& raw) {
    auto res = try_validate_system(raw);
    if (!res.ok()) throw ValidationError(std::move(res.violations));
    return *std::move(res.system);
}

inline json system_to_json(const BlockSystem& sys) {
    json modes = json::array();
    for (const auto& mode : sys.modes)
        modes.push_back({{"A", detail::matrix_to_json(mode.A)},
                         {"B", detail::matrix_to_json(mode.B)},
                         {"C", detail::matrix_to_json(mode.C)},
                         {"D", detail::matrix_to_json(mode.D)}});
    return {{"n", sys.n}, {"m", sys.m}, {"modes", modes}};
}

/// Signal schema: { "pieces": [ [mode_index, dwell], ... ] }.
inline PwcSignal parse_signal(const json& raw, int mode_count) {
    if (!raw.is_object() || !raw.contains("pieces") || !raw["pieces"].is_array())
        throw ValidationError({{-1, "pieces", "signal must be {\"pieces\": [[mode,dwell],..]}"}});
    PwcSignal sig;
    for (const auto& jp : raw["pieces"]) {
        if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number_integer() || !jp[1].is_number())
            throw ValidationError({{-1, "pieces", "each piece must be [mode_index, dwell]"}});
        PwcPiece p{jp[0].get<int>(), jp[1].get<double>()};
        if (p.mode < 0 || p.mode >= mode_count)
            throw ValidationError({{-1, "pieces", "mode index " + std::to_string(p.mode) + " out of range"}});
        if (!(p.dwell > 0.0) || !std::isfinite(p.dwell))
            throw ValidationError({{-1, "pieces", "dwell must be a positive finite number"}});
        sig.pieces.push_back(p);
    }
    if (sig.pieces.empty())
        throw ValidationError({{-1, "pieces", "signal must have at least one piece"}});
    return sig;
}

inline json signal_to_json(const PwcSignal& sig) {
    json pieces = json::array();
    for (const auto& p : sig.pieces) pieces.push_back({p.mode, p.dwell});
    return {{"pieces", pieces}};
}

/// Concatenation of `repetitions` copies of `sig`.
inline PwcSignal periodize(const PwcSignal& sig, int repetitions) {
    if (repetitions < 1) throw Error("periodize: repetitions must be >= 1");
    PwcSignal out;
    out.pieces.reserve(sig.pieces.size() * (size_t)repetitions);
    for (int r = 0; r < repetitions; ++r)
        out.pieces.insert(out.pieces.end(), sig.pieces.begin(), sig.pieces.end());
    return out;
}

/// Canonical FNV-1a digest of a signal (mode indices + dwell bit patterns).
inline std::uint64_t signal_digest(const PwcSignal& sig) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* p, size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& p : sig.pieces) {
        std::int64_t m = p.mode;
        std::uint64_t bits;
        std::memcpy(&bits, &p.dwell, sizeof bits);
        mix(&m, sizeof m);
        mix(&bits, sizeof bits);
    }
    return h;
}

}  // namespace slyap
