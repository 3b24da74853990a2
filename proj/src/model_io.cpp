#include "hexb/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hexb {

using nlohmann::json;

PiecewiseModel parse_model(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("model file is not valid JSON: ") + e.what());
    }

    PiecewiseModel m;
    try {
        m.r = j.at("r").get<double>();
        m.d = j.at("d").get<double>();
        m.spot = j.at("spot").get<double>();
        const auto alpha_plus = j.at("alpha_plus").get<std::vector<double>>();
        const auto alpha_minus = j.at("alpha_minus").get<std::vector<double>>();
        const int n_plus = j.at("n_plus").get<int>();
        const int n_minus = j.at("n_minus").get<int>();
        if (static_cast<int>(alpha_plus.size()) != n_plus ||
            static_cast<int>(alpha_minus.size()) != n_minus)
            throw io_error("alpha list lengths must equal n_plus / n_minus");

        for (const auto& jp : j.at("periods")) {
            if (jp.contains("mu"))
                throw io_error(
                    "model files must not specify drifts; they are implied by the "
                    "martingale condition");
            ModelPeriod p;
            p.duration = jp.at("duration").get<double>();
            p.sigma = jp.at("sigma").get<double>();
            const auto pi_plus = jp.at("pi_plus").get<std::vector<double>>();
            const auto pi_minus = jp.at("pi_minus").get<std::vector<double>>();
            if (static_cast<int>(pi_plus.size()) != n_plus ||
                static_cast<int>(pi_minus.size()) != n_minus)
                throw io_error("pi list lengths must equal n_plus / n_minus");
            for (int k = 0; k < n_plus; ++k)
                p.pos_jumps.emplace_back(pi_plus[k], alpha_plus[k]);
            for (int k = 0; k < n_minus; ++k)
                p.neg_jumps.emplace_back(pi_minus[k], alpha_minus[k]);
            m.periods.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw io_error(std::string("malformed model file: ") + e.what());
    }

    apply_risk_neutral_drift(m);
    return m;
}

PiecewiseModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_to_json(const PiecewiseModel& m) {
    json j;
    j["r"] = m.r;
    j["d"] = m.d;
    j["spot"] = m.spot;
    j["n_plus"] = m.n_plus();
    j["n_minus"] = m.n_minus();
    std::vector<double> ap, am;
    if (!m.periods.empty()) {
        for (const auto& f : m.periods.front().pos_jumps) ap.push_back(f.rate);
        for (const auto& f : m.periods.front().neg_jumps) am.push_back(f.rate);
    }
    j["alpha_plus"] = ap;
    j["alpha_minus"] = am;
    j["periods"] = json::array();
    for (const auto& p : m.periods) {
        json jp;
        jp["duration"] = p.duration;
        jp["sigma"] = p.sigma;
        std::vector<double> pp, pm;
        for (const auto& f : p.pos_jumps) pp.push_back(f.intensity);
        for (const auto& f : p.neg_jumps) pm.push_back(f.intensity);
        jp["pi_plus"] = pp;
        jp["pi_minus"] = pm;
        j["periods"].push_back(jp);
    }
    return j.dump(2) + "\n";
}

void save_model(const PiecewiseModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write model file: " + path);
    out << model_to_json(m);
}

}  // namespace hexb
