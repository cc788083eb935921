#include "srr/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "srr/forward.hpp"

namespace srr {

namespace {

// Generation retry budget: fresh matrices x fresh probes per matrix draw.
constexpr int kMatrixAttempts = 64;
constexpr int kProbeAttempts = 64;

// A singular value counts as nonzero iff it exceeds this times the largest.
constexpr double kRankTol = 1e-10;

Mat draw_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            a(i, j) = gauss(rng);
    return a;
}

Vec draw_vector(int len, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(len);
    for (int i = 0; i < len; ++i) v(i) = gauss(rng);
    return v;
}

Vec indicator_of(const Mat& a1, const Vec& x) {
    return ((a1 * x).array() > 0.0).cast<double>().matrix();
}

} // namespace

double spectral_norm(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

int numerical_rank(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double tol = kRankTol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    return rank;
}

ProblemInstance generate_instance(int n, int m, int d, double radius,
                                  std::uint64_t seed, double target_theta) {
    if (n < 2 * std::max(m, d)) {
        throw DimensionError("generate_instance: need n >= 2*max(m, d), got n=" +
                             std::to_string(n) + ", m=" + std::to_string(m) +
                             ", d=" + std::to_string(d));
    }
    if (m < 1 || d < 1) throw DimensionError("generate_instance: m and d must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("generate_instance: radius must be positive");
    if (!(target_theta > 0.0 && target_theta < 1.0))
        throw std::invalid_argument("generate_instance: target_theta must lie in (0, 1)");

    std::mt19937_64 rng(seed);
    const int need_active = static_cast<int>(std::ceil(target_theta * n));

    for (int attempt = 0; attempt < kMatrixAttempts; ++attempt) {
        Mat a1 = draw_matrix(n, d, rng);
        Mat a2 = draw_matrix(m, n, rng);
        Vec b = draw_vector(m, rng);

        // Rescale to spectral norm 0.9*radius and ||b|| = 0.9, leaving slack
        // so probe points can sit strictly inside the ball.
        a1 *= 0.9 * radius / spectral_norm(a1);
        a2 *= 0.9 * radius / spectral_norm(a2);
        b *= 0.9 / b.norm();

        for (int probe = 0; probe < kProbeAttempts; ++probe) {
            Vec x = draw_vector(d, rng);
            x *= 0.95 * radius / x.norm();
            const int active = static_cast<int>(indicator_of(a1, x).sum());
            if (active >= need_active) {
                ProblemInstance inst;
                inst.a1 = std::move(a1);
                inst.a2 = std::move(a2);
                inst.b = std::move(b);
                inst.w = Vec::Ones(m);
                inst.radius = radius;
                inst.n = n;
                inst.m = m;
                inst.d = d;
                inst.seed = seed;
                inst.ref_point = std::move(x);
                return inst;
            }
        }
    }
    throw GenerationFailed(
        "generate_instance: no probe reached " + std::to_string(need_active) +
        "/" + std::to_string(n) + " active units within the retry budget");
}

AssumptionReport validate_assumptions(const ProblemInstance& inst,
                                      const std::vector<Vec>& probe_points,
                                      double l) {
    if (probe_points.empty())
        throw EmptyProbeSet("validate_assumptions: probe set is empty");
    for (const Vec& x : probe_points) {
        if (x.size() != inst.d)
            throw DimensionError("validate_assumptions: probe has length " +
                                 std::to_string(x.size()) + ", expected " +
                                 std::to_string(inst.d));
        if (x.norm() > inst.radius * (1.0 + 1e-12))
            throw DimensionError("validate_assumptions: probe leaves the ball");
    }

    AssumptionReport rep;
    rep.a1_full_rank = numerical_rank(inst.a1) == std::min(inst.n, inst.d);
    rep.a2_full_rank = numerical_rank(inst.a2) == std::min(inst.m, inst.n);
    rep.xi = static_cast<double>(inst.n) / std::max(inst.m, inst.d);
    rep.pd_lower_bound_l = l;

    const Vec ind0 = indicator_of(inst.a1, probe_points.front());
    rep.theta = ind0.sum() / inst.n;

    const Mat c0 = c_matrix_from_indicator(inst, ind0);
    Eigen::JacobiSVD<Mat> svd(c0);
    const auto& sv = svd.singularValues();
    rep.sigma_min_c = sv(sv.size() - 1);

    double threshold;
    if (rep.sigma_min_c > 0.0) {
        threshold = 20.0 + l / (rep.sigma_min_c * rep.sigma_min_c);
        if (!std::isfinite(threshold)) threshold = std::numeric_limits<double>::max();
    } else {
        threshold = std::numeric_limits<double>::max();
    }
    rep.w_threshold = Vec::Constant(inst.m, threshold);

    rep.fixed_relu_state = true;
    for (const Vec& x : probe_points) {
        if (indicator_of(inst.a1, x) != ind0) {
            rep.fixed_relu_state = false;
            break;
        }
    }
    return rep;
}

ProblemInstance choose_weights(const ProblemInstance& inst, double l,
                               double margin) {
    if (!(l > 0.0)) throw std::invalid_argument("choose_weights: l must be positive");
    if (margin < 0.0) throw std::invalid_argument("choose_weights: margin must be >= 0");
    if (inst.ref_point.size() == 0)
        throw std::invalid_argument(
            "choose_weights: instance has no reference point (instances loaded "
            "from disk already carry their weights)");

    const Mat c = eval_c_matrix(inst, inst.ref_point);
    Eigen::JacobiSVD<Mat> svd(c);
    const auto& sv = svd.singularValues();
    const double sigma_min = sv(sv.size() - 1);
    if (sigma_min <= kRankTol * sv(0))
        throw RankDeficient("choose_weights: sigma_min(C) vanishes at the reference point");

    ProblemInstance out = inst;
    out.w = Vec::Constant(inst.m,
                          std::sqrt(20.0 + l / (sigma_min * sigma_min) + margin));
    return out;
}

namespace {

nlohmann::json matrix_to_rows(const Mat& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat rows_to_matrix(const nlohmann::json& rows, int want_rows, int want_cols,
                   const char* name) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != want_rows)
        throw DimensionError(std::string("instance json: ") + name +
                             " has the wrong row count");
    Mat a(want_rows, want_cols);
    for (int i = 0; i < want_rows; ++i) {
        const auto& row = rows.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != want_cols)
            throw DimensionError(std::string("instance json: ") + name +
                                 " has the wrong column count");
        for (int j = 0; j < want_cols; ++j) a(i, j) = row.at(j).get<double>();
    }
    return a;
}

Vec array_to_vector(const nlohmann::json& arr, int want_len, const char* name) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != want_len)
        throw DimensionError(std::string("instance json: ") + name +
                             " has the wrong length");
    Vec v(want_len);
    for (int i = 0; i < want_len; ++i) v(i) = arr.at(i).get<double>();
    return v;
}

} // namespace

std::string instance_to_json(const ProblemInstance& inst) {
    nlohmann::json j;
    j["n"] = inst.n;
    j["m"] = inst.m;
    j["d"] = inst.d;
    j["radius"] = inst.radius;
    j["a1"] = matrix_to_rows(inst.a1);
    j["a2"] = matrix_to_rows(inst.a2);
    j["b"] = nlohmann::json::array();
    for (int i = 0; i < inst.m; ++i) j["b"].push_back(inst.b(i));
    j["w"] = nlohmann::json::array();
    for (int i = 0; i < inst.m; ++i) j["w"].push_back(inst.w(i));
    j["seed"] = inst.seed;
    return j.dump(2) + "\n";
}

ProblemInstance instance_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("instance json: parse failed: ") +
                                    e.what());
    }
    ProblemInstance inst;
    try {
        inst.n = j.at("n").get<int>();
        inst.m = j.at("m").get<int>();
        inst.d = j.at("d").get<int>();
        inst.radius = j.at("radius").get<double>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        if (inst.n < 1 || inst.m < 1 || inst.d < 1)
            throw DimensionError("instance json: dimensions must be positive");
        inst.a1 = rows_to_matrix(j.at("a1"), inst.n, inst.d, "a1");
        inst.a2 = rows_to_matrix(j.at("a2"), inst.m, inst.n, "a2");
        inst.b = array_to_vector(j.at("b"), inst.m, "b");
        inst.w = array_to_vector(j.at("w"), inst.m, "w");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("instance json: bad field: ") +
                                    e.what());
    }
    return inst;
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << instance_to_json(inst);
    if (!out) throw std::runtime_error("write failed: " + path);
}

ProblemInstance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return instance_from_json(buf.str());
}

std::string report_to_json(const AssumptionReport& rep) {
    nlohmann::json j;
    j["a1_full_rank"] = rep.a1_full_rank;
    j["a2_full_rank"] = rep.a2_full_rank;
    j["xi"] = rep.xi;
    j["theta"] = rep.theta;
    j["sigma_min_c"] = rep.sigma_min_c;
    j["w_threshold"] = nlohmann::json::array();
    for (int i = 0; i < rep.w_threshold.size(); ++i)
        j["w_threshold"].push_back(rep.w_threshold(i));
    j["fixed_relu_state"] = rep.fixed_relu_state;
    j["pd_lower_bound_l"] = rep.pd_lower_bound_l;
    return j.dump(2) + "\n";
}

} // namespace srr
