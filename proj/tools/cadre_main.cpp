// Command-line frontend: dataset synthesis, training, evaluation, single-clip
// prediction, and the finite-difference gradient check.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 divergence / numeric
// blow-up, 4 check failure.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cadre/cadre.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitCheckFailed = 4;

// ---------------------------------------------------------------------------
// JSON <-> config

ordered_json network_to_json(const cadre::NetworkConfig& c) {
    ordered_json j;
    j["in_channels"] = c.in_channels;
    j["frames"] = c.frames;
    j["height"] = c.height;
    j["width"] = c.width;
    j["conv_channels"] = c.conv_channels;
    ordered_json kernels = ordered_json::array();
    for (const auto& k : c.conv_kernels) kernels.push_back({k[0], k[1], k[2]});
    j["conv_kernels"] = std::move(kernels);
    j["pool_after"] = c.pool_after;
    j["pool_window"] = {c.pool_window[0], c.pool_window[1], c.pool_window[2]};
    j["head_hidden1"] = c.head_hidden1;
    j["head_hidden2"] = c.head_hidden2;
    j["fusion_width"] = c.fusion_width;
    j["fused_units"] = c.fused_units;
    j["detector_hidden"] = c.detector_hidden;
    return j;
}

ordered_json train_to_json(const cadre::TrainConfig& c) {
    ordered_json j;
    j["lambda"] = c.lambda;
    j["beta"] = c.beta;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["phase1_steps"] = c.phase1_steps;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    return j;
}

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
}

void apply_network_json(const nlohmann::json& j, cadre::NetworkConfig& c) {
    reject_unknown_keys(j,
                        {"in_channels", "frames", "height", "width", "conv_channels",
                         "conv_kernels", "pool_after", "pool_window", "head_hidden1",
                         "head_hidden2", "fusion_width", "fused_units", "detector_hidden"},
                        "network");
    if (j.contains("in_channels")) c.in_channels = j["in_channels"].get<int>();
    if (j.contains("frames")) c.frames = j["frames"].get<int>();
    if (j.contains("height")) c.height = j["height"].get<int>();
    if (j.contains("width")) c.width = j["width"].get<int>();
    if (j.contains("conv_channels")) c.conv_channels = j["conv_channels"].get<std::vector<int>>();
    if (j.contains("conv_kernels")) {
        c.conv_kernels.clear();
        for (const auto& k : j["conv_kernels"]) {
            auto v = k.get<std::vector<int>>();
            if (v.size() != 3) throw ConfigError("config: each conv kernel needs 3 extents");
            c.conv_kernels.push_back({v[0], v[1], v[2]});
        }
    }
    if (j.contains("pool_after")) c.pool_after = j["pool_after"].get<std::vector<int>>();
    if (j.contains("pool_window")) {
        auto v = j["pool_window"].get<std::vector<int>>();
        if (v.size() != 3) throw ConfigError("config: pool_window needs 3 extents");
        c.pool_window = {v[0], v[1], v[2]};
    }
    if (j.contains("head_hidden1")) c.head_hidden1 = j["head_hidden1"].get<int>();
    if (j.contains("head_hidden2")) c.head_hidden2 = j["head_hidden2"].get<int>();
    if (j.contains("fusion_width")) c.fusion_width = j["fusion_width"].get<int>();
    if (j.contains("fused_units")) c.fused_units = j["fused_units"].get<int>();
    if (j.contains("detector_hidden")) c.detector_hidden = j["detector_hidden"].get<int>();
}

void apply_train_json(const nlohmann::json& j, cadre::TrainConfig& c) {
    reject_unknown_keys(j,
                        {"lambda", "beta", "learning_rate", "batch_size", "phase1_steps",
                         "epochs", "seed"},
                        "train");
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("beta")) c.beta = j["beta"].get<double>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("phase1_steps")) c.phase1_steps = j["phase1_steps"].get<int>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
}

/// Reads a JSON config file with optional "network" and "train" sections and
/// folds it over the given defaults.
void apply_config_file(const std::string& path, cadre::NetworkConfig& nc,
                       cadre::TrainConfig& tc) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    try {
        reject_unknown_keys(j, {"network", "train"}, "top level");
        if (j.contains("network")) apply_network_json(j["network"], nc);
        if (j.contains("train")) apply_train_json(j["train"], tc);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Report writers

ordered_json detection_to_json(const cadre::BinaryMetrics& m, const cadre::Confusion& c) {
    ordered_json j;
    j["precision"] = m.precision;
    j["detection_rate"] = m.detection_rate;
    j["f_measure"] = m.f_measure;
    j["accuracy"] = m.accuracy;
    ordered_json deg;
    deg["precision"] = m.precision_degenerate;
    deg["detection_rate"] = m.detection_rate_degenerate;
    deg["f_measure"] = m.f_degenerate;
    deg["accuracy"] = m.accuracy_degenerate;
    j["degenerate"] = std::move(deg);
    ordered_json conf;
    conf["tp"] = c.tp;
    conf["fp"] = c.fp;
    conf["fn"] = c.fn;
    conf["tn"] = c.tn;
    j["confusion"] = std::move(conf);
    return j;
}

ordered_json report_to_json(const cadre::MetricsReport& r) {
    ordered_json j;
    j["total_clips"] = r.total_clips;

    ordered_json scens = ordered_json::array();
    for (const auto& s : r.scenarios) {
        ordered_json js;
        js["scenario"] = s.scenario;
        js["name"] = cadre::kGlassesNames[static_cast<std::size_t>(s.scenario)];
        js["clips"] = s.clip_count;
        js["detection"] = detection_to_json(s.detection, s.detection_confusion);
        ordered_json heads;
        heads["glasses"] = s.glasses_acc;
        heads["head"] = s.head_acc;
        heads["mouth"] = s.mouth_acc;
        heads["eye"] = s.eye_acc;
        js["head_accuracy"] = std::move(heads);
        scens.push_back(std::move(js));
    }
    j["scenarios"] = std::move(scens);
    j["empty_scenarios"] = r.empty_scenarios;

    ordered_json avg;
    avg["precision"] = r.avg_precision;
    avg["detection_rate"] = r.avg_detection_rate;
    avg["f_measure"] = r.avg_f_measure;
    avg["accuracy"] = r.avg_accuracy;
    avg["glasses_acc"] = r.avg_glasses_acc;
    avg["head_acc"] = r.avg_head_acc;
    avg["mouth_acc"] = r.avg_mouth_acc;
    avg["eye_acc"] = r.avg_eye_acc;
    j["average_unweighted"] = std::move(avg);

    ordered_json overall = detection_to_json(r.overall, r.overall_confusion);
    overall["glasses_acc"] = r.overall_glasses_acc;
    overall["head_acc"] = r.overall_head_acc;
    overall["mouth_acc"] = r.overall_mouth_acc;
    overall["eye_acc"] = r.overall_eye_acc;
    j["overall_pooled"] = std::move(overall);

    if (r.auc_defined) {
        j["auc"] = r.roc.auc;
        ordered_json pts = ordered_json::array();
        for (const auto& p : r.roc.points) {
            ordered_json pt;
            pt["threshold"] =
                std::isfinite(p.threshold) ? ordered_json(p.threshold) : ordered_json(nullptr);
            pt["fpr"] = p.fpr;
            pt["tpr"] = p.tpr;
            pts.push_back(std::move(pt));
        }
        j["roc_points"] = std::move(pts);
    } else {
        j["auc"] = nullptr;
        j["roc_points"] = ordered_json::array();
    }
    return j;
}

std::string format_rate(double v, bool degenerate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8.4f%s", v, degenerate ? "*" : " ");
    return buf;
}

std::string report_to_text(const cadre::MetricsReport& r) {
    std::ostringstream os;
    bool any_degenerate = false;

    os << "Drowsiness detection\n";
    os << "  " << std::left << std::setw(22) << "scenario" << std::right << std::setw(6)
       << "clips" << "  precision  det.rate  f-measure  accuracy\n";
    auto detection_row = [&](const std::string& name, const std::string& clips,
                             const cadre::BinaryMetrics& m) {
        any_degenerate = any_degenerate || m.precision_degenerate ||
                         m.detection_rate_degenerate || m.f_degenerate || m.accuracy_degenerate;
        os << "  " << std::left << std::setw(22) << name << std::right << std::setw(6) << clips
           << "  " << format_rate(m.precision, m.precision_degenerate) << " "
           << format_rate(m.detection_rate, m.detection_rate_degenerate) << "  "
           << format_rate(m.f_measure, m.f_degenerate) << " "
           << format_rate(m.accuracy, m.accuracy_degenerate) << "\n";
    };
    for (const auto& s : r.scenarios)
        detection_row(cadre::kGlassesNames[static_cast<std::size_t>(s.scenario)],
                      std::to_string(s.clip_count), s.detection);
    cadre::BinaryMetrics avg;
    avg.precision = r.avg_precision;
    avg.detection_rate = r.avg_detection_rate;
    avg.f_measure = r.avg_f_measure;
    avg.accuracy = r.avg_accuracy;
    detection_row("Average (unweighted)", "-", avg);
    detection_row("Overall (pooled)", std::to_string(r.total_clips), r.overall);
    for (int s : r.empty_scenarios)
        os << "  (no clips for scenario " << s << ": "
           << cadre::kGlassesNames[static_cast<std::size_t>(s)] << ")\n";
    if (r.auc_defined) {
        std::ostringstream a;
        a << std::setprecision(6) << r.roc.auc;
        os << "  AUC " << a.str() << "\n";
    } else {
        os << "  AUC undefined (single-class dataset)\n";
    }

    os << "\nScene understanding (validation accuracy)\n";
    os << "  " << std::left << std::setw(22) << "scenario" << std::right
       << "  glasses      head     mouth       eye\n";
    auto head_row = [&](const std::string& name, double gl, double hd, double mo, double ey) {
        os << "  " << std::left << std::setw(22) << name << std::right << " "
           << format_rate(gl, false) << " " << format_rate(hd, false) << " "
           << format_rate(mo, false) << " " << format_rate(ey, false) << "\n";
    };
    for (const auto& s : r.scenarios)
        head_row(cadre::kGlassesNames[static_cast<std::size_t>(s.scenario)], s.glasses_acc,
                 s.head_acc, s.mouth_acc, s.eye_acc);
    head_row("Average (unweighted)", r.avg_glasses_acc, r.avg_head_acc, r.avg_mouth_acc,
             r.avg_eye_acc);
    if (any_degenerate) os << "\n  * zero by convention: the defining ratio had no members\n";
    return os.str();
}

std::string roc_to_csv(const cadre::RocResult& roc) {
    std::ostringstream os;
    os << "threshold,fpr,tpr\n";
    os << std::setprecision(17);
    for (const auto& p : roc.points) {
        if (std::isfinite(p.threshold))
            os << p.threshold;
        else
            os << "inf";
        os << "," << p.fpr << "," << p.tpr << "\n";
    }
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    cadre::atomic_write_file(path, [&content](std::ostream& os) { os << content; });
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthArgs {
    std::string out;
    int clips = 0;
    std::uint64_t seed = 0;
    std::string size = "32x32";
};

bool parse_size(const std::string& s, int& h, int& w) {
    char extra = 0;
    return std::sscanf(s.c_str(), "%dx%d%c", &h, &w, &extra) == 2 && h >= 8 && w >= 8;
}

int run_synth(const SynthArgs& a) {
    int h = 0, w = 0;
    parse_size(a.size, h, w);  // validated during CLI parse
    ordered_json cfg;
    cfg["command"] = "synth";
    cfg["out"] = a.out;
    cfg["clips"] = a.clips;
    cfg["seed"] = a.seed;
    cfg["height"] = h;
    cfg["width"] = w;
    std::cout << "effective config: " << cfg.dump() << "\n";

    cadre::SynthConfig sc;
    sc.height = h;
    sc.width = w;
    cadre::Dataset ds = cadre::synth_generate(a.clips, a.seed, sc);
    cadre::save_dataset(a.out, ds);
    std::cout << "wrote " << ds.clips.size() << " clips to " << a.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data, out, config;
    std::optional<int> epochs, phase1_steps, batch_size;
    std::optional<double> lambda, beta, lr;
    std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
    cadre::NetworkConfig nc;
    cadre::TrainConfig tc;
    if (!a.config.empty()) apply_config_file(a.config, nc, tc);
    if (a.epochs) tc.epochs = *a.epochs;
    if (a.phase1_steps) tc.phase1_steps = *a.phase1_steps;
    if (a.batch_size) tc.batch_size = *a.batch_size;
    if (a.lambda) tc.lambda = *a.lambda;
    if (a.beta) tc.beta = *a.beta;
    if (a.lr) tc.learning_rate = *a.lr;
    if (a.seed) tc.seed = *a.seed;
    cadre::check_train_config(tc);

    ordered_json cfg;
    cfg["command"] = "train";
    cfg["data"] = a.data;
    cfg["out"] = a.out;
    cfg["network"] = network_to_json(nc);
    cfg["train"] = train_to_json(tc);
    std::cout << "effective config: " << cfg.dump() << "\n";

    cadre::Dataset ds = cadre::load_dataset(a.data);
    if (ds.clips.empty()) throw cadre::IOError("dataset " + a.data + " holds no clips");
    // Dataset geometry wins over the config's default extents so a 224x224
    // dataset trains a 224x224 network without extra flags.
    const cadre::Shape& cs = ds.clips[0].clip.shape();
    nc.in_channels = cs[0];
    nc.frames = cs[1];
    nc.height = cs[2];
    nc.width = cs[3];

    cadre::Network net = cadre::make_network(nc, tc.seed);
    std::cout << "parameters: " << cadre::param_count(net)
              << ", conv multiply-adds per clip: " << cadre::rep_mac_count(nc) << "\n";
    cadre::TrainReport report = cadre::train(net, ds, tc, &std::cout);
    cadre::save_checkpoint(a.out, net);

    const cadre::StepRecord& last = report.steps.back();
    std::cout << "trained " << report.steps.size() << " steps in " << std::fixed
              << std::setprecision(1) << report.wall_seconds << "s, final joint loss "
              << std::setprecision(6) << last.joint << "\n";
    std::cout << "checkpoint " << a.out << " (parameter checksum " << std::hex
              << report.final_checksum << std::dec << ")\n";
    return kExitOk;
}

struct EvalArgs {
    std::string data, checkpoint, report, roc_csv;
};

int run_eval(const EvalArgs& a) {
    ordered_json cfg;
    cfg["command"] = "eval";
    cfg["data"] = a.data;
    cfg["checkpoint"] = a.checkpoint;
    cfg["report"] = a.report;
    if (!a.roc_csv.empty()) cfg["roc_csv"] = a.roc_csv;
    std::cout << "effective config: " << cfg.dump() << "\n";

    cadre::Network net = cadre::load_checkpoint(a.checkpoint);
    cadre::Dataset ds = cadre::load_dataset(a.data);
    cadre::MetricsReport report = cadre::evaluate(net, ds);

    write_text_file(a.report + ".json", report_to_json(report).dump(2) + "\n");
    write_text_file(a.report + ".txt", report_to_text(report));
    if (!a.roc_csv.empty()) {
        if (!report.auc_defined)
            throw std::invalid_argument("ROC CSV requested but AUC is undefined "
                                        "(single-class dataset)");
        write_text_file(a.roc_csv, roc_to_csv(report.roc));
    }

    std::cout << "evaluated " << report.total_clips << " clips: overall accuracy " << std::fixed
              << std::setprecision(4) << report.overall.accuracy << ", unweighted average "
              << report.avg_accuracy;
    if (report.auc_defined) std::cout << ", AUC " << report.roc.auc;
    std::cout << "\nreports: " << a.report << ".json, " << a.report << ".txt\n";
    return kExitOk;
}

struct PredictArgs {
    std::string checkpoint, clip;
};

int run_predict(const PredictArgs& a) {
    // --clip accepts "dataset.cadd" (first clip) or "dataset.cadd:INDEX".
    std::string path = a.clip;
    std::size_t index = 0;
    const std::size_t colon = a.clip.rfind(':');
    if (colon != std::string::npos && colon + 1 < a.clip.size()) {
        const std::string suffix = a.clip.substr(colon + 1);
        if (!suffix.empty() &&
            suffix.find_first_not_of("0123456789") == std::string::npos) {
            path = a.clip.substr(0, colon);
            index = static_cast<std::size_t>(std::stoull(suffix));
        }
    }

    ordered_json cfg;
    cfg["command"] = "predict";
    cfg["checkpoint"] = a.checkpoint;
    cfg["data"] = path;
    cfg["clip_index"] = index;
    std::cout << "effective config: " << cfg.dump() << "\n";

    cadre::Network net = cadre::load_checkpoint(a.checkpoint);
    cadre::Dataset ds = cadre::load_dataset(path);
    if (index >= ds.clips.size())
        throw cadre::IOError("clip index " + std::to_string(index) + " out of range; dataset " +
                             path + " holds " + std::to_string(ds.clips.size()) + " clips");

    cadre::Prediction p = cadre::predict_clip(net, ds.clips[index].clip);
    std::cout << "glasses/illumination: "
              << cadre::kGlassesNames[static_cast<std::size_t>(p.glasses)] << "\n";
    std::cout << "head: " << cadre::kHeadNames[static_cast<std::size_t>(p.head)] << "\n";
    std::cout << "mouth: " << cadre::kMouthNames[static_cast<std::size_t>(p.mouth)] << "\n";
    std::cout << "eye: " << cadre::kEyeNames[static_cast<std::size_t>(p.eye)] << "\n";
    std::cout << "drowsiness: " << cadre::kDetectorNames[static_cast<std::size_t>(p.drowsy)]
              << " (p=" << std::fixed << std::setprecision(4) << p.drowsy_prob << ")\n";
    return kExitOk;
}

struct GradcheckArgs {
    std::uint64_t seed = 1;
    double tolerance = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
    ordered_json cfg;
    cfg["command"] = "gradcheck";
    cfg["seed"] = a.seed;
    cfg["tolerance"] = a.tolerance;
    std::cout << "effective config: " << cfg.dump() << "\n";

    cadre::GradCheckReport r = cadre::grad_check(a.tolerance, {a.seed});
    for (const auto& g : r.groups)
        std::cout << "  " << std::left << std::setw(28) << g.name << std::scientific
                  << std::setprecision(3) << g.max_rel_err << std::defaultfloat << "\n";
    std::cout << "max relative error " << std::scientific << std::setprecision(3)
              << r.max_rel_err << " vs tolerance " << r.tolerance << std::defaultfloat << "\n";
    std::cout << "gradient check: " << (r.pass ? "PASS" : "FAIL") << "\n";
    return r.pass ? kExitOk : kExitCheckFailed;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const cadre::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const cadre::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"condition-adaptive drowsiness detection toolkit"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic clip dataset");
    synth->add_option("--out", synth_args.out, "output dataset file")->required();
    synth->add_option("--clips", synth_args.clips, "number of clips")
        ->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed, "generator seed (default 0)");
    synth->add_option("--size", synth_args.size, "frame extents as HxW (default 32x32)")
        ->check([](const std::string& s) -> std::string {
            int h = 0, w = 0;
            return parse_size(s, h, w) ? "" : "expected HxW with both extents >= 8";
        });

    TrainArgs train_args;
    double lambda_v = 0, beta_v = 0, lr_v = 0;
    int epochs_v = 0, phase1_v = 0, batch_v = 0;
    std::uint64_t train_seed_v = 0;
    CLI::App* train = app.add_subcommand("train", "train a network on a dataset");
    train->add_option("--data", train_args.data, "training dataset")->required();
    train->add_option("--out", train_args.out, "checkpoint to write")->required();
    train->add_option("--config", train_args.config, "JSON config file (flags win over it)");
    train->add_option("--epochs", epochs_v, "training epochs")->check(CLI::PositiveNumber);
    train->add_option("--phase1-steps", phase1_v,
                      "steps before fusion/detector start learning")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--lambda", lambda_v, "balance of detection vs condition losses")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--beta", beta_v, "regularizer on the summed condition losses")
        ->check(CLI::PositiveNumber);
    train->add_option("--lr", lr_v, "SGD learning rate")->check(CLI::PositiveNumber);
    train->add_option("--batch", batch_v, "batch size")->check(CLI::PositiveNumber);
    train->add_option("--seed", train_seed_v, "seed for init and shuffling");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--data", eval_args.data, "evaluation dataset")->required();
    eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint to evaluate")->required();
    eval->add_option("--report", eval_args.report,
                     "report base path (writes BASE.json and BASE.txt)")
        ->required();
    eval->add_option("--roc-csv", eval_args.roc_csv, "also dump ROC points as CSV");

    PredictArgs predict_args;
    CLI::App* predict = app.add_subcommand("predict", "predict one clip from a dataset");
    predict->add_option("--checkpoint", predict_args.checkpoint, "checkpoint to use")->required();
    predict->add_option("--clip", predict_args.clip,
                        "clip as dataset path or path:index (default index 0)")
        ->required();

    GradcheckArgs gradcheck_args;
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "verify analytic gradients by finite differences");
    gradcheck->add_option("--seed", gradcheck_args.seed, "seed for the probe network and batch");
    gradcheck->add_option("--tolerance", gradcheck_args.tolerance,
                          "max allowed relative error (default 1e-4)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (synth->parsed()) return guarded([&] { return run_synth(synth_args); });
    if (train->parsed())
        return guarded([&] {
            if (train->count("--epochs")) train_args.epochs = epochs_v;
            if (train->count("--phase1-steps")) train_args.phase1_steps = phase1_v;
            if (train->count("--batch")) train_args.batch_size = batch_v;
            if (train->count("--lambda")) train_args.lambda = lambda_v;
            if (train->count("--beta")) train_args.beta = beta_v;
            if (train->count("--lr")) train_args.lr = lr_v;
            if (train->count("--seed")) train_args.seed = train_seed_v;
            return run_train(train_args);
        });
    if (eval->parsed()) return guarded([&] { return run_eval(eval_args); });
    if (predict->parsed()) return guarded([&] { return run_predict(predict_args); });
    if (gradcheck->parsed()) return guarded([&] { return run_gradcheck(gradcheck_args); });
    return kExitUsage;  // unreachable given require_subcommand
}
