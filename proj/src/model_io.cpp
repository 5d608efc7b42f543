#include "ftk/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ftk/errors.hpp"

namespace ftk {

namespace {

using Json = nlohmann::ordered_json;

Json params_json(const KernelParams& p) { return Json{{"sigma", p.sigma}, {"theta", p.theta}}; }

KernelParams params_from(const Json& j) { return {j.at("sigma").get<double>(), j.at("theta").get<double>()}; }

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const Json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json report_json(const FitReport& r) {
    return Json{{"nll", r.nll},
                {"nll_gradient_norm", r.nll_gradient_norm},
                {"optimizer_iterations", r.iterations},
                {"optimizer_starts", r.starts},
                {"converged", r.converged},
                {"objective", r.objective},
                {"max_violation", r.max_violation},
                {"kkt_residual", r.kkt_residual},
                {"qp_iterations", r.qp_iterations},
                {"active_constraints", r.active_constraints}};
}

FitReport report_from(const Json& j, const KernelParams& params) {
    FitReport r;
    r.params = params;
    r.nll = j.at("nll").get<double>();
    r.nll_gradient_norm = j.at("nll_gradient_norm").get<double>();
    r.iterations = j.at("optimizer_iterations").get<int>();
    r.starts = j.at("optimizer_starts").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.objective = j.at("objective").get<double>();
    r.max_violation = j.at("max_violation").get<double>();
    r.kkt_residual = j.at("kkt_residual").get<double>();
    r.qp_iterations = j.at("qp_iterations").get<int>();
    r.active_constraints = j.at("active_constraints").get<int>();
    return r;
}

Json curve_json(const CurveModel& m, const FitReport& r) {
    return Json{{"params", params_json(m.params)},
                {"gamma", m.gamma_penalty},
                {"seasonality", m.seasonality_enabled},
                {"xi", vector_json(m.xi)},
                {"fit", report_json(r)}};
}

CurveModel curve_from(const Json& j, const TimeGrid& grid, FitReport& report) {
    CurveModel m;
    m.grid = grid;
    m.params = params_from(j.at("params"));
    m.gamma_penalty = j.at("gamma").get<double>();
    m.seasonality_enabled = j.at("seasonality").get<bool>();
    m.xi = vector_from(j.at("xi"));
    if (m.xi.size() != grid.size()) throw ValidationError("model xi length does not match the grid");
    report = report_from(j.at("fit"), m.params);
    return m;
}

Json quote_json(const Quote& q) {
    return Json{{"id", q.id},
                {"kind", std::string(kind_code(q.kind))},
                {"window", format_window(q.kind, q.window)},
                {"window2", q.window2 ? format_window(q.kind, *q.window2) : std::string{}},
                {"bid", q.bid},
                {"ask", q.ask}};
}

Quote quote_from(const Json& j) {
    Quote q;
    q.id = j.at("id").get<std::string>();
    const auto code = j.at("kind").get<std::string>();
    const auto kind = kind_from_code(code);
    if (!kind) throw ValidationError("unknown contract kind '" + code + "' in model");
    q.kind = *kind;
    q.window = parse_window(q.kind, j.at("window").get<std::string>());
    const auto w2 = j.at("window2").get<std::string>();
    if (!w2.empty()) q.window2 = parse_window(q.kind, w2);
    q.bid = j.at("bid").get<double>();
    q.ask = j.at("ask").get<double>();
    return q;
}

}  // namespace

std::string serialize_model(const PersistedModel& model) {
    const TimeGrid& grid = model.penalized.grid;
    Json quotes = Json::array();
    for (const auto& q : model.snapshot.quotes) quotes.push_back(quote_json(q));
    Json doc{{"schema_version", model.schema_version},
             {"asof", model.snapshot.observation_date.to_string()},
             {"grid", Json{{"origin", grid.origin().to_string()}, {"nodes", grid.size()}, {"dt", grid.dt()}}},
             {"model", curve_json(model.penalized, model.report)},
             {"model_unpenalized", curve_json(model.plain, model.plain_report)},
             {"benchmark", Json{{"relative_nugget", model.benchmark_nugget}}},
             {"quotes", std::move(quotes)}};
    return doc.dump(2) + "\n";
}

PersistedModel deserialize_model(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("model document is not valid JSON: ") + e.what());
    }
    try {
        PersistedModel m;
        m.schema_version = doc.at("schema_version").get<int>();
        if (m.schema_version != kModelSchemaVersion) {
            throw ValidationError("unsupported model schema version " + std::to_string(m.schema_version));
        }
        m.snapshot.observation_date = Date::parse(doc.at("asof").get<std::string>());
        const Json& g = doc.at("grid");
        const TimeGrid grid(YearMonth::parse(g.at("origin").get<std::string>()), g.at("nodes").get<int>());
        m.penalized = curve_from(doc.at("model"), grid, m.report);
        m.plain = curve_from(doc.at("model_unpenalized"), grid, m.plain_report);
        m.benchmark_nugget = doc.at("benchmark").at("relative_nugget").get<double>();
        for (const auto& q : doc.at("quotes")) m.snapshot.quotes.push_back(quote_from(q));
        validate_snapshot(m.snapshot);
        return m;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const PersistedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    out << serialize_model(model);
    if (!out) throw IoError("failed writing model file '" + path + "'");
}

PersistedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace ftk
