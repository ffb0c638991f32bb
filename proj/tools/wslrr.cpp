// wslrr: command-line front end for verification, weak-data simulation and
// corrected-loss training.
//
//   wslrr verify     --joint J --scenario NAME|PATH [--params JSON] [--tol T] [--seed S] [--out R]
//   wslrr verify-all [--K 4] [--nx 6] [--trials 20] [--seed 7] [--out R]
//   wslrr simulate   --joint J --scenario NAME|PATH [--params JSON] --n N|CH=N,... --seed S --out D
//   wslrr train      --data D --joint J --loss logistic --lr LR --epochs E [--l2 L] [--seed S] [--out M] [--trace CSV]
//
// Exit codes: 0 success / all checks pass, 1 failed checks or diverged training,
// 2 usage, input or validation errors.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wslrr/wslrr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

/// A scenario argument is a path to a {"name","params"} file when such a file exists, else a name.
wslrr::ScenarioSpec load_scenario(const std::string& arg, const std::string& params_text) {
    if (std::filesystem::is_regular_file(arg)) return wslrr::scenario_from_json(wslrr::detail::parse_text(wslrr::read_file(arg)));
    const wslrr::json params = params_text.empty() ? wslrr::json::object() : wslrr::detail::parse_text(params_text);
    return wslrr::scenario_from_name(arg, params);
}

/// "1000" gives every channel 1000 samples; "P=500,U=1000" sets them per channel.
wslrr::SampleSizes parse_sizes(const std::string& text, const wslrr::ScenarioSpec& spec) {
    auto parse_count = [](const std::string& s) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != s.size()) throw wslrr::Error(wslrr::ErrorCode::InvalidParams, "bad sample size '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    if (text.find('=') == std::string::npos) return wslrr::uniform_sizes(spec, parse_count(text));
    wslrr::SampleSizes out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw wslrr::Error(wslrr::ErrorCode::InvalidParams, "bad size entry '" + part + "'");
        out[part.substr(0, eq)] = parse_count(part.substr(eq + 1));
    }
    return out;
}

void print_summary(const wslrr::VerifyReport& r) {
    std::size_t failed = 0;
    for (const auto& c : r.checks) {
        if (c.pass) continue;
        ++failed;
        std::cout << "FAIL " << c.name << " [" << c.scenario << "] err=" << c.max_abs_err << " tol=" << c.tolerance;
        if (!c.error.empty()) std::cout << " (" << c.error << ")";
        std::cout << "\n";
    }
    std::cout << r.checks.size() - failed << "/" << r.checks.size() << " checks passed (seed " << r.seed << ")\n";
}

void emit_report(const wslrr::VerifyReport& r, const std::string& out) {
    const std::string text = wslrr::verify_report_to_json(r).dump(2) + "\n";
    if (!out.empty()) wslrr::write_file(out, text);
    print_summary(r);
}

int cmd_verify(const std::string& joint_path, const std::string& scen, const std::string& params, std::optional<double> tol,
               std::uint64_t seed, const std::string& out) {
    const wslrr::FiniteJoint j = wslrr::joint_from_text(wslrr::read_file(joint_path));
    const wslrr::ScenarioSpec spec = load_scenario(scen, params);
    wslrr::check_user_spec(spec, j.K);
    wslrr::validate_spec(spec, wslrr::marginals(j)); // validation failures are usage errors
    wslrr::Tolerances t;
    if (tol) t = {*tol, *tol, *tol, *tol, *tol, t.monte_carlo_se, *tol, t.erm_agreement};
    wslrr::VerifyReport r{seed, wslrr::verify_scenario(spec, j, seed, t)};
    emit_report(r, out);
    return r.pass() ? kExitOk : kExitFail;
}

int cmd_verify_all(const wslrr::VerifyConfig& cfg, const std::string& out) {
    if (cfg.K < 2 || cfg.nx < 3 || cfg.trials < 0)
        throw wslrr::Error(wslrr::ErrorCode::InvalidParams, "need K >= 2, nx >= 3, trials >= 0");
    if (cfg.K > 8) throw wslrr::Error(wslrr::ErrorCode::KTooLarge, "K is limited to 8");
    const wslrr::VerifyReport r = wslrr::verify_all(cfg);
    emit_report(r, out);
    return r.pass() ? kExitOk : kExitFail;
}

int cmd_simulate(const std::string& joint_path, const std::string& scen, const std::string& params, const std::string& n,
                 std::uint64_t seed, const std::string& out) {
    const wslrr::FiniteJoint j = wslrr::joint_from_text(wslrr::read_file(joint_path));
    const wslrr::ScenarioSpec spec = load_scenario(scen, params);
    wslrr::check_user_spec(spec, j.K);
    const wslrr::WeakDataset ds = wslrr::sample_weak_dataset(spec, j, parse_sizes(n, spec), seed);
    wslrr::write_file(out, wslrr::dataset_to_json(ds).dump() + "\n");
    std::cout << wslrr::scenario_name(spec) << " dataset written to " << out << ":";
    for (const auto& ch : ds.channels) std::cout << " " << ch.label << "=" << ch.items.size();
    std::cout << "\n";
    return kExitOk;
}

int cmd_train(const std::string& data_path, const std::string& joint_path, const std::string& loss_name,
              const wslrr::TrainConfig& cfg, const std::string& out, std::string trace) {
    const wslrr::FiniteJoint j = wslrr::joint_from_text(wslrr::read_file(joint_path));
    const wslrr::WeakDataset ds = wslrr::dataset_from_text(wslrr::read_file(data_path));
    const wslrr::LossKind loss = wslrr::parse_loss(loss_name);
    if (!wslrr::is_differentiable(loss)) throw wslrr::Error(wslrr::ErrorCode::NonDifferentiableLoss, "training needs a differentiable loss");
    if (trace.empty()) trace = std::filesystem::path(out).replace_extension(".csv").string();
    wslrr::TrainResult r;
    try {
        r = wslrr::train_erm(ds, j, loss, cfg);
    } catch (const wslrr::Error& e) {
        if (e.code() != wslrr::ErrorCode::Diverged) throw;
        std::cerr << "wslrr: " << e.what() << "\n";
        return kExitFail;
    }
    wslrr::write_file(out, wslrr::model_to_json(r.model).dump(2) + "\n");
    std::ostringstream csv;
    csv << "epoch,risk\n" << std::setprecision(17);
    for (std::size_t e = 0; e < r.trace.size(); ++e) csv << e << "," << r.trace[e] << "\n";
    wslrr::write_file(trace, csv.str());
    std::cout << std::setprecision(10) << "final empirical objective: " << r.trace.back() << "\n"
              << "final exact " << wslrr::loss_name(loss) << " risk: " << wslrr::classification_risk(j, r.model, loss) << "\n"
              << "final exact zero-one risk: " << wslrr::classification_risk(j, r.model, wslrr::LossKind::ZeroOne) << "\n"
              << "model written to " << out << ", trace to " << trace << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contamination/decontamination toolkit for weakly supervised learning"};
    app.require_subcommand(1);

    std::string joint, scen, params, out, n, data, loss = "logistic", trace;
    std::optional<double> tol;
    std::uint64_t seed = 0;

    auto* verify = app.add_subcommand("verify", "Run all checks for one scenario on one joint");
    verify->add_option("--joint", joint, "Joint distribution JSON")->required();
    verify->add_option("--scenario", scen, "Scenario name or scenario JSON file")->required();
    verify->add_option("--params", params, "Scenario parameters as inline JSON");
    verify->add_option("--tol", tol, "Tolerance override for every check");
    verify->add_option("--seed", seed, "Seed of the random model");
    verify->add_option("--out", out, "Report JSON path");

    wslrr::VerifyConfig vcfg;
    std::string all_out;
    auto* verify_all = app.add_subcommand("verify-all", "Run the full seeded verification grid");
    verify_all->add_option("--K", vcfg.K, "Largest class count")->capture_default_str();
    verify_all->add_option("--nx", vcfg.nx, "Largest instance count")->capture_default_str();
    verify_all->add_option("--trials", vcfg.trials, "Trials per scenario")->capture_default_str();
    verify_all->add_option("--seed", vcfg.seed, "Master seed")->capture_default_str();
    verify_all->add_option("--out", all_out, "Report JSON path");

    std::uint64_t sim_seed = 0;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Sample a weak dataset from a joint");
    simulate->add_option("--joint", joint, "Joint distribution JSON")->required();
    simulate->add_option("--scenario", scen, "Scenario name or scenario JSON file")->required();
    simulate->add_option("--params", params, "Scenario parameters as inline JSON");
    simulate->add_option("--n", n, "Samples per channel: N, or CHANNEL=N,...")->required();
    simulate->add_option("--seed", sim_seed, "Sampling seed")->required();
    simulate->add_option("--out", sim_out, "Dataset JSON path")->required();

    wslrr::TrainConfig tcfg;
    std::string model_out = "model.json";
    auto* train = app.add_subcommand("train", "Corrected-loss ERM of a linear model");
    train->add_option("--data", data, "Dataset JSON")->required();
    train->add_option("--joint", joint, "Joint distribution JSON")->required();
    train->add_option("--loss", loss, "logistic or squared")->capture_default_str();
    train->add_option("--lr", tcfg.learning_rate, "Learning rate")->required();
    train->add_option("--epochs", tcfg.epochs, "Full-batch epochs")->required();
    train->add_option("--l2", tcfg.l2, "L2 penalty on W")->capture_default_str();
    train->add_option("--seed", tcfg.seed, "Initialization seed")->capture_default_str();
    train->add_option("--out", model_out, "Model JSON path")->capture_default_str();
    train->add_option("--trace", trace, "Loss trace CSV path (default: model path with .csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*verify) return cmd_verify(joint, scen, params, tol, seed, out);
        if (*verify_all) return cmd_verify_all(vcfg, all_out);
        if (*simulate) return cmd_simulate(joint, scen, params, n, sim_seed, sim_out);
        if (*train) return cmd_train(data, joint, loss, tcfg, model_out, trace);
    } catch (const wslrr::Error& e) {
        std::cerr << "wslrr: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
