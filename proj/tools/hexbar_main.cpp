// hexbar: semi-analytic barrier option pricing in a hyper-exponential
// additive model, with a Monte-Carlo cross-check and quote calibration.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hexb/calibration.hpp"
#include "hexb/errors.hpp"
#include "hexb/model_io.hpp"
#include "hexb/montecarlo.hpp"
#include "hexb/pricing.hpp"

namespace {

using nlohmann::json;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Options {
    std::string model_path;
    std::string quotes_path;
    std::string out_path;
    std::string format = "csv";
    double barrier_pct = 90.0;
    std::vector<double> spots_pct;
    std::vector<double> strikes_pct;
    std::vector<double> schedule;
    int maturity_index = 0;
    hexb::NumericalParams num;
    hexb::McConfig mc;
};

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json params;
};

void write_output(const Table& t, const Options& opt) {
    std::ostringstream body;
    if (opt.format == "json") {
        json j;
        j["command"] = t.command;
        j["params"] = t.params;
        j["rows"] = json::array();
        for (const auto& row : t.rows) {
            json jr;
            for (size_t c = 0; c < t.columns.size(); ++c)
                jr[t.columns[c]] = std::stod(fmt6(row[c]));
            j["rows"].push_back(jr);
        }
        body << j.dump(2) << "\n";
    } else {
        body << "# hexbar " << t.command << " " << t.params.dump() << "\n";
        for (size_t c = 0; c < t.columns.size(); ++c)
            body << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
        for (const auto& row : t.rows) {
            for (size_t c = 0; c < row.size(); ++c)
                body << fmt6(row[c]) << (c + 1 < row.size() ? "," : "\n");
        }
    }
    if (opt.out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw hexb::io_error("cannot write output file: " + opt.out_path);
        out << body.str();
    }
}

hexb::PiecewiseModel load_and_slice(const Options& opt) {
    hexb::PiecewiseModel m = hexb::load_model(opt.model_path);
    if (!opt.schedule.empty()) m = hexb::truncate_to_schedule(m, opt.schedule);
    hexb::require_valid(m);
    return m;
}

json params_json(const Options& opt, bool with_mc) {
    json p;
    p["talbot_m"] = opt.num.talbot_m;
    p["fft_n"] = opt.num.fft_n;
    p["fft_delta"] = opt.num.fft_delta;
    p["fft_x0"] = opt.num.fft_x0;
    p["damp_alpha"] = opt.num.damp_alpha;
    p["barrier_pct"] = opt.barrier_pct;
    if (with_mc) {
        p["mc_paths"] = opt.mc.paths;
        p["mc_dt"] = opt.mc.dt;
        p["seed"] = opt.mc.seed;
    }
    return p;
}

// Digital tables run over spot levels, call tables over strikes; both follow
// the usual percent-of-reference layout.
void run_price_or_greeks(const Options& opt, bool greeks) {
    const hexb::PiecewiseModel m = load_and_slice(opt);
    const double barrier = opt.barrier_pct / 100.0 * m.spot;
    Table t;
    t.params = params_json(opt, false);

    if (!opt.spots_pct.empty() && !opt.strikes_pct.empty())
        throw CLI::ValidationError("pass either --spots or --strikes, not both");

    if (!opt.spots_pct.empty()) {
        hexb::DidPricer pricer(m, opt.num.talbot_m, opt.num.threads);
        t.command = greeks ? "greeks(down-and-in digital)" : "price(down-and-in digital)";
        t.columns = greeks
                        ? std::vector<std::string>{"spot_pct", "price", "delta_x1e3",
                                                   "gamma_x1e7"}
                        : std::vector<std::string>{"spot_pct", "price"};
        for (double pct : opt.spots_pct) {
            const double spot = pct / 100.0 * m.spot;
            if (greeks) {
                const auto pg = pricer.greeks(spot, barrier);
                t.rows.push_back({pct, pg.price, pg.delta * 1e3, pg.gamma * 1e7});
            } else {
                t.rows.push_back({pct, pricer.price(spot, barrier)});
            }
        }
    } else if (!opt.strikes_pct.empty()) {
        hexb::DicPricer pricer(m, barrier, opt.num);
        t.command = greeks ? "greeks(down-and-in call)" : "price(down-and-in call)";
        t.columns = greeks
                        ? std::vector<std::string>{"strike_pct", "price", "delta_x1e1",
                                                   "gamma_x1e4"}
                        : std::vector<std::string>{"strike_pct", "price"};
        for (double pct : opt.strikes_pct) {
            const double strike = pct / 100.0 * m.spot;
            const auto pg = pricer.at_strike(m.spot, strike);
            if (greeks)
                t.rows.push_back({pct, pg.price, pg.delta * 1e1, pg.gamma * 1e4});
            else
                t.rows.push_back({pct, pg.price});
        }
    } else {
        throw CLI::ValidationError("need a non-empty --spots or --strikes list");
    }
    write_output(t, opt);
}

void run_european(const Options& opt) {
    const hexb::PiecewiseModel m = load_and_slice(opt);
    if (opt.strikes_pct.empty())
        throw CLI::ValidationError("need a non-empty --strikes list");
    const int idx = opt.maturity_index > 0 ? opt.maturity_index : m.num_periods();
    Table t;
    t.command = "european";
    t.params = params_json(opt, false);
    t.params["maturity_index"] = idx;
    t.columns = {"strike_pct", "price"};
    for (double pct : opt.strikes_pct) {
        const double strike = pct / 100.0 * m.spot;
        t.rows.push_back({pct, hexb::european_call(m, idx, strike, opt.num.damp_alpha)});
    }
    write_output(t, opt);
}

void run_validate(const Options& opt) {
    hexb::PiecewiseModel m = load_and_slice(opt);
    const double barrier = opt.barrier_pct / 100.0 * m.spot;
    Table t;
    t.params = params_json(opt, true);

    hexb::BarrierContract contract;
    contract.barrier = barrier;
    contract.schedule = m.schedule();

    if (!opt.spots_pct.empty()) {
        t.command = "validate(down-and-in digital)";
        t.columns = {"spot_pct", "ta_price", "mc_lo", "mc_hi", "inside_ci"};
        hexb::DidPricer pricer(m, opt.num.talbot_m, opt.num.threads);
        for (double pct : opt.spots_pct) {
            hexb::PiecewiseModel shifted = m;
            shifted.spot = pct / 100.0 * m.spot;
            contract.kind = hexb::BarrierContract::Kind::DownInDigital;
            const double ta = pricer.price(shifted.spot, barrier);
            const auto mc = hexb::mc_did(shifted, contract, opt.mc);
            t.rows.push_back({pct, ta, mc.lo(), mc.hi(), mc.covers(ta) ? 1.0 : 0.0});
        }
    } else if (!opt.strikes_pct.empty()) {
        t.command = "validate(down-and-in call)";
        t.columns = {"strike_pct", "ta_price", "mc_lo", "mc_hi", "inside_ci"};
        hexb::DicPricer pricer(m, barrier, opt.num);
        contract.kind = hexb::BarrierContract::Kind::DownInCall;
        for (double pct : opt.strikes_pct) {
            contract.strike = pct / 100.0 * m.spot;
            const double ta = pricer.at_strike(m.spot, contract.strike).price;
            const auto mc = hexb::mc_dic(m, contract, opt.mc);
            t.rows.push_back({pct, ta, mc.lo(), mc.hi(), mc.covers(ta) ? 1.0 : 0.0});
        }
    } else {
        throw CLI::ValidationError("need a non-empty --spots or --strikes list");
    }
    write_output(t, opt);
}

void run_calibrate(const Options& opt) {
    const hexb::PiecewiseModel seed_model = hexb::load_model(opt.model_path);
    if (opt.quotes_path.empty()) throw CLI::ValidationError("need --quotes");

    hexb::CalibrationOptions copts;
    copts.schedule = opt.schedule.empty() ? seed_model.schedule() : opt.schedule;
    copts.r = seed_model.r;
    copts.d = seed_model.d;
    copts.spot = seed_model.spot;
    copts.damp_alpha = opt.num.damp_alpha;
    if (!seed_model.periods.empty()) {
        for (const auto& f : seed_model.periods.front().neg_jumps)
            copts.alpha_minus.push_back(f.rate);
        for (const auto& f : seed_model.periods.front().pos_jumps)
            copts.alpha_plus.push_back(f.rate);
    }

    std::vector<std::string> warnings;
    const auto quotes = hexb::load_quotes(opt.quotes_path, &warnings);
    auto result = hexb::bootstrap_calibrate(quotes, copts);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    json j;
    j["command"] = "calibrate";
    j["rmse"] = result.rmse;
    j["arpe"] = result.arpe;
    j["converged"] = result.converged;
    j["model"] = json::parse(hexb::model_to_json(result.model));
    j["trace"] = json::array();
    for (const auto& tr : result.trace) {
        json jt;
        jt["maturity"] = tr.maturity;
        jt["objective"] = tr.objective;
        jt["iterations"] = tr.iterations;
        jt["converged"] = tr.converged;
        j["trace"].push_back(jt);
    }
    const std::string body = j.dump(2) + "\n";
    if (opt.out_path.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw hexb::io_error("cannot write output file: " + opt.out_path);
        out << body;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-analytic barrier option pricing under a hyper-exponential "
                 "additive model"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd, bool with_mc) {
        cmd->add_option("--model", opt.model_path, "model file (JSON)")->required();
        cmd->add_option("--barrier-pct", opt.barrier_pct,
                        "barrier as a percent of the model spot");
        cmd->add_option("--spots", opt.spots_pct, "spot levels, percent of model spot");
        cmd->add_option("--strikes", opt.strikes_pct, "strikes, percent of model spot");
        cmd->add_option("--schedule", opt.schedule, "period lengths in years");
        cmd->add_option("--talbot-m", opt.num.talbot_m, "Talbot precision parameter")
            ->check(CLI::Range(3, 12));
        cmd->add_option("--fft-n", opt.num.fft_n, "strike-inversion grid size")
            ->check(CLI::Range(4, 1 << 16));
        cmd->add_option("--fft-delta", opt.num.fft_delta, "frequency step");
        cmd->add_option("--fft-x0", opt.num.fft_x0, "log-strike half range");
        cmd->add_option("--damp-alpha", opt.num.damp_alpha, "payoff dampening rate");
        cmd->add_option("--threads", opt.num.threads, "worker cap");
        cmd->add_option("--format", opt.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--out", opt.out_path, "output path (default stdout)");
        if (with_mc) {
            cmd->add_option("--mc-paths", opt.mc.paths, "Monte-Carlo path count");
            cmd->add_option("--mc-dt", opt.mc.dt, "Monte-Carlo grid step");
            cmd->add_option("--seed", opt.mc.seed, "Monte-Carlo seed");
            cmd->add_option("--mc-bump", opt.mc.bump, "relative bump for MC greeks");
        }
    };

    auto* price = app.add_subcommand("price", "semi-analytic barrier prices");
    add_common(price, false);
    auto* greeks = app.add_subcommand("greeks", "prices with delta and gamma");
    add_common(greeks, false);
    auto* validate =
        app.add_subcommand("validate", "semi-analytic vs Monte-Carlo comparison");
    add_common(validate, true);
    auto* european = app.add_subcommand("european", "European calls");
    add_common(european, false);
    european->add_option("--maturity-index", opt.maturity_index,
                         "1-based maturity index (default: last)");
    auto* calibrate =
        app.add_subcommand("calibrate", "bootstrap fit to European call quotes");
    add_common(calibrate, false);
    calibrate->add_option("--quotes", opt.quotes_path, "quote CSV file");

    try {
        app.parse(argc, argv);
        if (price->parsed()) run_price_or_greeks(opt, false);
        if (greeks->parsed()) run_price_or_greeks(opt, true);
        if (validate->parsed()) run_validate(opt);
        if (european->parsed()) run_european(opt);
        if (calibrate->parsed()) run_calibrate(opt);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const hexb::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const hexb::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
