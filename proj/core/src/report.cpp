#include "abcd/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "abcd/csv.hpp"

namespace abcd::report {

namespace {

// JSON has no NaN; reports carry null instead.
nlohmann::json num(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

std::string fmt(double v, const char* format = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

}  // namespace

std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

nlohmann::json to_json(const RegressionFit& fit) {
    auto coefs = nlohmann::json::array();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        coefs.push_back({{"name", fit.names[i]},
                         {"coef", num(fit.coef(static_cast<int>(i)))},
                         {"se", num(fit.std_error(static_cast<int>(i)))},
                         {"t", num(fit.t_value(static_cast<int>(i)))},
                         {"p", num(fit.p_value(static_cast<int>(i)))}});
    }
    return nlohmann::json{{"coefficients", coefs}, {"n", fit.n},
                          {"df_resid", fit.df_resid}, {"rss", num(fit.rss)},
                          {"r2", num(fit.r2)},       {"adj_r2", num(fit.adj_r2)}};
}

nlohmann::json to_json(const IvFit& fit) {
    auto coefs = nlohmann::json::array();
    for (std::size_t i = 0; i < fit.second_stage_names.size(); ++i) {
        coefs.push_back({{"name", fit.second_stage_names[i]},
                         {"coef", num(fit.second_stage_coef(static_cast<int>(i)))},
                         {"se", num(fit.second_stage_se(static_cast<int>(i)))},
                         {"t", num(fit.second_stage_t(static_cast<int>(i)))},
                         {"p", num(fit.second_stage_p(static_cast<int>(i)))}});
    }
    return nlohmann::json{{"second_stage", coefs},
                          {"first_stage", to_json(fit.first_stage)},
                          {"first_stage_F", num(fit.first_stage_f)},
                          {"first_stage_F_p", num(fit.first_stage_f_p)},
                          {"gate_passed", fit.gate_passed},
                          {"instruments", fit.coding.columns},
                          {"reference", fit.coding.reference},
                          {"n", fit.n}};
}

nlohmann::json to_json(const AnchoringEffect& eff) {
    return nlohmann::json{{"effect", num(eff.effect)},   {"se", num(eff.se)},
                          {"p", num(eff.p)},             {"F", num(eff.f)},
                          {"n", eff.n},                  {"n_high", eff.n_high},
                          {"n_low", eff.n_low},          {"mean_high", num(eff.mean_high)},
                          {"mean_low", num(eff.mean_low)}};
}

nlohmann::json to_json(const PlaceboMatrix& matrix) {
    auto regressions = nlohmann::json::array();
    for (std::size_t r = 0; r < matrix.belief_names.size(); ++r) {
        auto cells = nlohmann::json::array();
        for (std::size_t t = 0; t < matrix.treatment_names.size(); ++t) {
            const auto& c = matrix.cells[r][t];
            cells.push_back({{"treatment", matrix.treatment_names[t]},
                             {"coef", num(c.coef)},
                             {"se", num(c.se)},
                             {"p", num(c.p)},
                             {"is_placebo", c.is_placebo},
                             {"flagged", c.flagged}});
        }
        regressions.push_back({{"belief", matrix.belief_names[r]},
                               {"cells", cells},
                               {"constant", num(matrix.constant[r])},
                               {"constant_se", num(matrix.constant_se[r])},
                               {"n", matrix.n[r]},
                               {"adj_r2", num(matrix.adj_r2[r])}});
    }
    return nlohmann::json{{"regressions", regressions}};
}

nlohmann::json to_json(const DecayReport& decay) {
    auto lagged = nlohmann::json::array();
    auto lag_json = [](const LaggedEffect& l) {
        return nlohmann::json{{"bin", {l.day_lo, l.day_hi}}, {"mean_lag", num(l.mean_lag)},
                              {"effect", num(l.effect)},     {"se", num(l.se)},
                              {"F", num(l.f)},               {"p", num(l.p)},
                              {"n", l.n}};
    };
    for (const auto& l : decay.lagged) lagged.push_back(lag_json(l));
    return nlohmann::json{{"instantaneous", to_json(decay.instantaneous)},
                          {"lagged", lagged},
                          {"pooled", lag_json(decay.pooled)},
                          {"decay_ratio", num(decay.decay_ratio)},
                          {"warnings", decay.warnings}};
}

nlohmann::json to_json(const McSummary& summary) {
    nlohmann::json per;
    for (const auto& [est, s] : summary.per_estimator) {
        per[estimator_name(est)] = {{"mean_estimate", num(s.mean_estimate)},
                                    {"empirical_sd", num(s.empirical_sd)},
                                    {"mean_reported_se", num(s.mean_reported_se)},
                                    {"bias", num(s.bias)},
                                    {"coverage", num(s.coverage)},
                                    {"replicates_used", s.estimates.size()}};
    }
    return nlohmann::json{{"estimators", per},
                          {"replicates", summary.replicates},
                          {"analytic_ols_bias", num(summary.analytic_ols_bias)},
                          {"failed_replicates", summary.failed_replicates},
                          {"config_warning", summary.config_warning}};
}

nlohmann::json to_json(const ResultsTable& table) {
    nlohmann::json j{{"outcome", table.outcome},
                     {"ols", to_json(table.ols)},
                     {"anchoring_effect", to_json(table.anchoring)},
                     {"first_stage_F", num(table.binary_first_stage_f)},
                     {"coded_first_stage_F", num(table.coded_first_stage_f)},
                     {"observations", table.observations},
                     {"outcome_mean", num(table.outcome_mean)},
                     {"outcome_sd", num(table.outcome_sd)}};
    if (table.iv_calculated) {
        j["iv"] = to_json(table.iv);
    } else {
        j["iv"] = {{"status", "not calculated (F <= 10)"}};
    }
    return j;
}

std::string to_text(const std::vector<ResultsTable>& tables, const std::string& belief_label) {
    std::ostringstream out;
    out << "Regression of outcomes on the post-treatment belief (" << belief_label << ")\n";
    out << std::string(72, '-') << "\n";
    for (const auto& t : tables) {
        out << "Outcome: " << t.outcome << "\n";
        const int bi = t.ols.index(belief_label);
        out << "  OLS  belief " << fmt(t.ols.coef(bi)) << stars(t.ols.p_value(bi)) << " ("
            << fmt(t.ols.std_error(bi)) << ")\n";
        if (t.iv_calculated) {
            out << "  IV   belief " << fmt(t.iv.coef_of(belief_label))
                << stars(t.iv.p_of(belief_label)) << " (" << fmt(t.iv.se_of(belief_label))
                << ")\n";
        } else {
            out << "  IV   not calculated (F <= 10)\n";
        }
        out << "  Anchoring effect " << fmt(t.anchoring.effect) << stars(t.anchoring.p) << " (SE "
            << fmt(t.anchoring.se) << ", F = " << fmt(t.binary_first_stage_f) << ")\n";
        if (t.coded_first_stage_f != t.binary_first_stage_f) {
            out << "  First-stage F (requested coding) " << fmt(t.coded_first_stage_f) << "\n";
        }
        out << "  Observations " << t.observations << ", mean " << fmt(t.outcome_mean) << ", SD "
            << fmt(t.outcome_sd) << "\n";
        out << std::string(72, '-') << "\n";
    }
    out << "Stars: * p<0.05, ** p<0.01, *** p<0.001. Standard errors in parentheses.\n";
    return out.str();
}

std::string to_text(const PlaceboMatrix& matrix) {
    std::ostringstream out;
    out << "Placebo tests: one regression per belief on all treatment dummies\n";
    out << "(placebo cells marked with [p], flagged when p < 0.05)\n";
    out << std::string(72, '-') << "\n";
    for (std::size_t r = 0; r < matrix.belief_names.size(); ++r) {
        out << "Belief: " << matrix.belief_names[r] << "\n";
        for (std::size_t t = 0; t < matrix.treatment_names.size(); ++t) {
            const auto& c = matrix.cells[r][t];
            out << "  " << matrix.treatment_names[t] << "  " << fmt(c.coef) << stars(c.p) << " ("
                << fmt(c.se) << ")";
            if (c.is_placebo) out << "  [p]";
            if (c.flagged) out << "  <-- significant placebo effect";
            out << "\n";
        }
        out << "  const  " << fmt(matrix.constant[r]) << " (" << fmt(matrix.constant_se[r])
            << ")\n";
        out << "  n = " << matrix.n[r] << ", adj R^2 = " << fmt(matrix.adj_r2[r]) << "\n";
        out << std::string(72, '-') << "\n";
    }
    return out.str();
}

std::string to_text(const DecayReport& decay) {
    std::ostringstream out;
    out << "Anchoring-effect decay\n" << std::string(72, '-') << "\n";
    out << "Instantaneous: " << fmt(decay.instantaneous.effect) << stars(decay.instantaneous.p)
        << " (SE " << fmt(decay.instantaneous.se) << ", F = " << fmt(decay.instantaneous.f)
        << ", n = " << decay.instantaneous.n << ")\n";
    for (const auto& l : decay.lagged) {
        out << "Lag [" << l.day_lo << ", " << l.day_hi << "] days (mean " << fmt(l.mean_lag)
            << "): " << fmt(l.effect) << stars(l.p) << " (SE " << fmt(l.se)
            << ", F = " << fmt(l.f) << ", n = " << l.n << ")\n";
    }
    out << "Pooled lag [" << decay.pooled.day_lo << ", " << decay.pooled.day_hi << "]: "
        << fmt(decay.pooled.effect) << " -> decay ratio " << fmt(decay.decay_ratio) << "\n";
    for (const auto& w : decay.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string curve_to_csv(const CurveSeries& series) {
    const bool has_ci = !series.ci_lo.empty();
    std::string out = has_ci ? "x,y,ci_lo,ci_hi\n" : "x,y\n";
    for (std::size_t i = 0; i < series.x.size(); ++i) {
        out += csv::format_double(series.x[i]);
        out += ',';
        out += csv::format_double(series.y[i]);
        if (has_ci) {
            out += ',';
            out += csv::format_double(series.ci_lo[i]);
            out += ',';
            out += csv::format_double(series.ci_hi[i]);
        }
        out += '\n';
    }
    return out;
}

std::string curve_to_svg(const CurveSeries& series, const std::string& title) {
    constexpr double W = 640, H = 400, ML = 60, MR = 20, MT = 40, MB = 40;
    double xmin = series.x.front(), xmax = series.x.back();
    double ymin = series.y.front(), ymax = series.y.front();
    auto widen = [&](double v) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    };
    for (double v : series.y) widen(v);
    for (double v : series.ci_lo) widen(v);
    for (double v : series.ci_hi) widen(v);
    if (ymax == ymin) ymax = ymin + 1.0;
    if (xmax == xmin) xmax = xmin + 1.0;

    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    svg << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    svg << "<text x='" << ML << "' y='" << H - MB + 16 << "' font-size='10'>" << fmt(xmin)
        << "</text>\n<text x='" << W - MR << "' y='" << H - MB + 16
        << "' text-anchor='end' font-size='10'>" << fmt(xmax) << "</text>\n";
    svg << "<text x='" << ML - 4 << "' y='" << H - MB << "' text-anchor='end' font-size='10'>"
        << fmt(ymin) << "</text>\n<text x='" << ML - 4 << "' y='" << MT + 8
        << "' text-anchor='end' font-size='10'>" << fmt(ymax) << "</text>\n";

    if (series.kind == CurveSeries::Kind::EffectBar) {
        const double bar_w = (W - ML - MR) / (2.0 * series.x.size());
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            const double cx = px(series.x[i]);
            const double top = py(std::max(series.y[i], 0.0));
            const double bottom = py(std::min(series.y[i], 0.0));
            svg << "<rect x='" << cx - bar_w / 2 << "' y='" << top << "' width='" << bar_w
                << "' height='" << std::max(1.0, bottom - top) << "' fill='steelblue'/>\n";
            if (!series.ci_lo.empty()) {
                svg << "<line x1='" << cx << "' y1='" << py(series.ci_lo[i]) << "' x2='" << cx
                    << "' y2='" << py(series.ci_hi[i]) << "' stroke='black'/>\n";
            }
        }
    } else {
        if (!series.ci_lo.empty()) {
            std::ostringstream area;
            for (std::size_t i = 0; i < series.x.size(); ++i) {
                area << (i ? " " : "") << px(series.x[i]) << "," << py(series.ci_hi[i]);
            }
            for (std::size_t i = series.x.size(); i-- > 0;) {
                area << " " << px(series.x[i]) << "," << py(series.ci_lo[i]);
            }
            svg << "<polygon points='" << area.str()
                << "' fill='lightsteelblue' fill-opacity='0.5' stroke='none'/>\n";
        }
        std::ostringstream pts;
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            pts << (i ? " " : "") << px(series.x[i]) << "," << py(series.y[i]);
        }
        svg << "<polyline points='" << pts.str()
            << "' fill='none' stroke='black' stroke-width='1.5'/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string config_hash(const nlohmann::json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

bool type_matches(const nlohmann::json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number() || v.is_null();  // null encodes NaN
    if (type == "integer") return v.is_number_integer();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return true;
}

void validate_node(const nlohmann::json& doc, const nlohmann::json& schema,
                   const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const std::string type = schema.at("type").get<std::string>();
        if (!type_matches(doc, type)) {
            errors.push_back(path + ": expected " + type + ", got " + doc.type_name());
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema.at("enum")) {
            if (v == doc) {
                found = true;
                break;
            }
        }
        if (!found) errors.push_back(path + ": value not in enum");
    }
    if (doc.is_object()) {
        for (const auto& req : schema.value("required", nlohmann::json::array())) {
            if (!doc.contains(req.get<std::string>())) {
                errors.push_back(path + ": missing required key '" + req.get<std::string>() + "'");
            }
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema.at("properties").items()) {
                if (doc.contains(key)) validate_node(doc.at(key), sub, path + "/" + key, errors);
            }
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            validate_node(doc[i], schema.at("items"), path + "/" + std::to_string(i), errors);
        }
    }
}

}  // namespace

std::vector<std::string> validate_against_schema(const nlohmann::json& doc,
                                                 const nlohmann::json& schema) {
    std::vector<std::string> errors;
    validate_node(doc, schema, "", errors);
    return errors;
}

}  // namespace abcd::report
