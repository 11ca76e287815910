#include "vmflow/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vmflow {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error("config error at " + path + ": " + msg);
}

const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) fail(path + "/" + key, "missing field");
    return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

std::string need_string(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_string()) fail(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

Vector parse_vector(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(path, "expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Matrix parse_matrix(const json& j, const std::string& path) {
    if (j.is_object() && j.contains("diag"))
        return Matrix(parse_vector(j.at("diag"), path + "/diag").asDiagonal());
    if (!j.is_array() || j.empty() || !j[0].is_array())
        fail(path, "expected an array of rows or {\"diag\": [...]}");
    size_t rows = j.size(), cols = j[0].size();
    Matrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) fail(path, "ragged matrix");
        for (size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                j[i][k].get<double>();
    }
    return m;
}

FunctionSpec parse_function(const json& j, const std::string& path) {
    std::string kind = need_string(j, "kind", path);
    if (kind == "l1") return FunctionSpec::l1(need_number(j, "weight", path));
    if (kind == "box")
        return FunctionSpec::box(parse_vector(need(j, "lower", path), path + "/lower"),
                                 parse_vector(need(j, "upper", path), path + "/upper"));
    if (kind == "quadratic") {
        double c = j.contains("c") ? need_number(j, "c", path) : 0.0;
        return FunctionSpec::quadratic(parse_matrix(need(j, "q", path), path + "/q"),
                                       parse_vector(need(j, "b", path), path + "/b"), c);
    }
    if (kind == "positive_part") return FunctionSpec::positive_part();
    if (kind == "zero") return FunctionSpec::zero();
    fail(path + "/kind", "unknown function kind '" + kind + "'");
}

OperatorSpec parse_operator(const json& j, const std::string& path) {
    std::string kind = need_string(j, "kind", path);
    if (kind == "affine") {
        Matrix m = parse_matrix(need(j, "matrix", path), path + "/matrix");
        Vector off = j.contains("offset")
                         ? parse_vector(j.at("offset"), path + "/offset")
                         : Vector(Vector::Zero(m.rows()));
        return OperatorSpec::affine(std::move(m), std::move(off));
    }
    if (kind == "inverse_of_matrix")
        return OperatorSpec::inverse_of_matrix(
            parse_matrix(need(j, "matrix", path), path + "/matrix"));
    if (kind == "subdifferential")
        return OperatorSpec::subdifferential(
            parse_function(need(j, "function", path), path + "/function"));
    if (kind == "piecewise_scalar") {
        const json& bps = need(j, "breakpoints", path);
        const json& ps = need(j, "pieces", path);
        std::vector<double> breakpoints = bps.get<std::vector<double>>();
        std::vector<ScalarPiece> pieces;
        for (size_t i = 0; i < ps.size(); ++i) {
            std::string p = path + "/pieces";
            pieces.push_back({need_number(ps[i], "slope", p),
                              need_number(ps[i], "intercept", p)});
        }
        return OperatorSpec::piecewise_scalar(std::move(breakpoints), std::move(pieces));
    }
    if (kind == "yosida_of")
        return OperatorSpec::yosida_of(
            parse_operator(need(j, "base", path), path + "/base"),
            need_number(j, "index", path));
    if (kind == "zero") {
        int d = static_cast<int>(need_number(j, "dim", path));
        return OperatorSpec::zero(d);
    }
    fail(path + "/kind", "unknown operator kind '" + kind + "'");
}

LambdaSchedule parse_lambda(const json& j, const std::string& path) {
    std::string kind = need_string(j, "kind", path);
    if (kind == "constant") return LambdaSchedule::constant(need_number(j, "value", path));
    if (kind == "piecewise")
        return LambdaSchedule::piecewise(
            need(j, "breakpoints", path).get<std::vector<double>>(),
            need(j, "values", path).get<std::vector<double>>());
    if (kind == "harmonic") return LambdaSchedule::harmonic();
    fail(path + "/kind", "unknown lambda kind '" + kind + "'");
}

ResolventConvention parse_convention(const json& j, const std::string& path) {
    std::string s = j.get<std::string>();
    if (s == "exact") return ResolventConvention::Exact;
    if (s == "yosida") return ResolventConvention::YosidaForm;
    fail(path, "convention must be 'exact' or 'yosida'");
}

FlowSpec parse_inline_spec(const json& j, const std::string& path) {
    std::string kind = need_string(j, "kind", path);
    Metric metric{parse_matrix(need(j, "M", path), path + "/M")};
    double gamma = need_number(j, "gamma", path);
    LambdaSchedule lambda = j.contains("lambda")
                                ? parse_lambda(j.at("lambda"), path + "/lambda")
                                : LambdaSchedule::constant(1.0);
    ResolventConvention conv =
        j.contains("convention")
            ? parse_convention(j.at("convention"), path + "/convention")
            : ResolventConvention::YosidaForm;

    FlowConstants constants;
    if (j.contains("constants")) {
        const json& c = j.at("constants");
        std::string cp = path + "/constants";
        constants.alpha = c.contains("alpha") ? need_number(c, "alpha", cp) : gamma;
        constants.beta = c.contains("beta") ? need_number(c, "beta", cp) : 1.0;
        constants.kappa = c.contains("kappa") ? need_number(c, "kappa", cp) : gamma;
        if (c.contains("rho")) constants.rho = need_number(c, "rho", cp);
        if (c.contains("eta")) constants.eta = need_number(c, "eta", cp);
    } else {
        constants = FlowConstants{gamma, 1.0, gamma, std::nullopt, std::nullopt};
    }

    if (kind == "PROX") {
        FlowSpec spec = make_prox_flow(
            parse_function(need(j, "f", path), path + "/f"),
            parse_function(need(j, "g", path), path + "/g"), std::move(metric),
            gamma, std::move(lambda), conv, constants.kappa);
        return spec;
    }
    FlowKind fk;
    if (kind == "BF") fk = FlowKind::BF;
    else if (kind == "FB") fk = FlowKind::FB;
    else fail(path + "/kind", "flow kind must be BF, FB or PROX");
    return make_flow(fk, parse_operator(need(j, "A", path), path + "/A"),
                     parse_operator(need(j, "B", path), path + "/B"),
                     std::move(metric), gamma, std::move(lambda), conv, constants);
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    const std::string root = "$";
    double version = need_number(j, "schemaVersion", root);
    if (version != 1)
        fail(root + "/schemaVersion", "unsupported schema version");

    RunConfig rc;
    const json& prob = need(j, "problem", root);
    bool hasBuiltin = prob.contains("builtin");
    bool hasInline = prob.contains("inline");
    if (hasBuiltin == hasInline)
        fail(root + "/problem", "exactly one of 'builtin' or 'inline' required");
    if (hasBuiltin)
        rc.builtinName = need_string(prob, "builtin", root + "/problem");
    else
        rc.inlineSpec = parse_inline_spec(prob.at("inline"), root + "/problem/inline");

    if (j.contains("u0")) rc.u0 = parse_vector(j.at("u0"), root + "/u0");
    if (j.contains("x0")) rc.x0 = parse_vector(j.at("x0"), root + "/x0");

    if (j.contains("integrator")) {
        const json& it = j.at("integrator");
        const std::string ip = root + "/integrator";
        if (it.contains("method")) {
            std::string m = need_string(it, "method", root);
            if (m == "euler") rc.method = IntegratorConfig::Method::Euler;
            else if (m == "rk4") rc.method = IntegratorConfig::Method::RK4;
            else if (m == "rk45") rc.method = IntegratorConfig::Method::RK45;
            else fail(ip + "/method", "unknown method '" + m + "'");
        }
        if (it.contains("h")) rc.h = need_number(it, "h", ip);
        if (it.contains("relTol")) rc.relTol = need_number(it, "relTol", ip);
        if (it.contains("absTol")) rc.absTol = need_number(it, "absTol", ip);
        if (it.contains("tEnd")) rc.tEnd = need_number(it, "tEnd", ip);
        if (it.contains("recordStride"))
            rc.recordStride = static_cast<int>(need_number(it, "recordStride", ip));
    }
    if (j.contains("outputs")) {
        const json& out = j.at("outputs");
        if (out.contains("trajectory"))
            rc.trajectoryPath = need_string(out, "trajectory", root + "/outputs");
        if (out.contains("report"))
            rc.reportPath = need_string(out, "report", root + "/outputs");
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

ResolvedRun resolve_run(const RunConfig& rc) {
    ResolvedRun run;
    if (rc.builtinName) {
        ProblemInstance inst = builtin(*rc.builtinName);
        run.problemName = inst.name;
        run.spec = std::move(inst.spec);
        run.u0 = inst.u0Default;
        run.cfg = inst.defaultConfig;
        run.solution = std::move(inst.solution);
        run.flowFixedPoint = std::move(inst.flowFixedPoint);
    } else {
        run.problemName = "inline";
        run.spec = *rc.inlineSpec;
        run.u0 = Vector::Zero(run.spec.dim());
    }
    if (rc.u0) {
        if (rc.u0->size() != run.spec.dim())
            throw std::runtime_error("config error at $/u0: dimension mismatch");
        run.u0 = *rc.u0;
    }
    if (rc.method) run.cfg.method = *rc.method;
    if (rc.h) run.cfg.h = *rc.h;
    if (rc.relTol) run.cfg.relTol = *rc.relTol;
    if (rc.absTol) run.cfg.absTol = *rc.absTol;
    if (rc.tEnd) run.cfg.tEnd = *rc.tEnd;
    if (rc.recordStride) run.cfg.recordStride = *rc.recordStride;
    run.cfg.validate();
    return run;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int d = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
    os << "t";
    for (int i = 0; i < d; ++i) os << ",u_" << i;
    os << ",residual";
    bool obj = !traj.objective.empty();
    if (obj) os << ",objective";
    os << "\n";
    for (size_t r = 0; r < traj.size(); ++r) {
        os << fmt17(traj.times[r]);
        for (int i = 0; i < d; ++i) os << ',' << fmt17(traj.states[r][i]);
        os << ',' << fmt17(traj.residuals[r]);
        if (obj) os << ',' << fmt17(traj.objective[r]);
        os << "\n";
    }
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream ss;
    write_trajectory_csv(ss, traj);
    return ss.str();
}

Trajectory read_trajectory_csv(std::istream& is) {
    Trajectory traj;
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("trajectory csv: empty input");
    int cols = 1;
    for (char c : line)
        if (c == ',') ++cols;
    bool obj = line.size() >= 9 && line.rfind(",objective") != std::string::npos;
    int d = cols - 2 - (obj ? 1 : 0);
    if (d < 1) throw std::runtime_error("trajectory csv: bad header");

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> nums;
        const char* p = line.c_str();
        char* end = nullptr;
        while (*p) {
            nums.push_back(std::strtod(p, &end));
            p = (*end == ',') ? end + 1 : end;
        }
        if (static_cast<int>(nums.size()) != cols)
            throw std::runtime_error("trajectory csv: bad row");
        traj.times.push_back(nums[0]);
        Vector u(d);
        for (int i = 0; i < d; ++i) u[i] = nums[1 + i];
        traj.states.push_back(std::move(u));
        traj.residuals.push_back(nums[1 + d]);
        if (obj) traj.objective.push_back(nums[2 + d]);
    }
    return traj;
}

std::string render_run_report(const ResolvedRun& run, const Trajectory& traj,
                              const ConvergenceReport& rep) {
    std::ostringstream ss;
    char buf[256];
    ss << "vmflow run report\n";
    ss << "problem: " << run.problemName << "\n";
    ss << "kind: " << to_string(run.spec.kind)
       << "  convention: " << to_string(run.spec.convention);
    std::snprintf(buf, sizeof buf, "  gamma: %g\n", run.spec.gamma);
    ss << buf;
    std::snprintf(buf, sizeof buf, "metric: dim %d, m = %g, ||M|| = %g\n",
                  run.spec.dim(), run.spec.metric.strong_positivity(),
                  run.spec.metric.op_norm());
    ss << buf;
    ss << "lambda: " << run.spec.lambda.describe() << "\n";
    std::snprintf(buf, sizeof buf, "integrator: %s h=%g tEnd=%g stride=%d\n",
                  to_string(traj.config.method).c_str(), traj.config.h,
                  traj.config.tEnd, traj.config.recordStride);
    ss << buf;
    std::snprintf(buf, sizeof buf, "samples: %zu  completed: %s\n", traj.size(),
                  traj.completed ? "yes" : (traj.abortReason + " (aborted)").c_str());
    ss << buf;
    std::snprintf(buf, sizeof buf, "spec hash: %016llx\n",
                  static_cast<unsigned long long>(traj.specHash));
    ss << buf;
    if (auto gap = resolvent_convention_gap(run.spec.backward, run.spec.metric,
                                            run.spec.gamma, run.u0)) {
        std::snprintf(buf, sizeof buf,
                      "resolvent convention gap at u0: %.6g%s\n", *gap,
                      *gap > 1e-8 ? "  (conventions differ for this data)" : "");
        ss << buf;
    }
    ss << "convergence:\n" << rep.render();
    return ss.str();
}

} // namespace vmflow
