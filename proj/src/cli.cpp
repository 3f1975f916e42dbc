#include "wvic/cli.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wvic/gml.hpp"
#include "wvic/mcp.hpp"
#include "wvic/metrics.hpp"
#include "wvic/sim.hpp"
#include "wvic/stream_io.hpp"

namespace wvic {

using Json = nlohmann::ordered_json;

namespace {

struct SimulateArgs {
    SimConfig cfg;
    std::string model = "uniform";
    std::string out;
};

struct CountArgs {
    McpConfig cfg;
    std::string aggregator = "max";
    std::vector<std::string> inputs;
    std::string report;
    std::string report_dir;
};

struct LossArgs {
    LossConfig cfg;
    std::string input;
    std::string out;
};

struct GradcheckArgs {
    LossConfig cfg;
    std::string input;
    std::uint64_t seed = 0;
    int count = 50;
    int max_rows = 6;
    int max_cols = 8;
    int max_shared = 5;
    int dim = 16;
    double step = 1e-5;
    double fail_above = 1e-4;
};

struct EvalArgs {
    std::vector<std::string> reports;
};

void add_loss_flags(CLI::App* cmd, LossConfig& cfg) {
    cmd->add_option("--gamma-scale", cfg.temperature, "Similarity scale inside the exponent (1/gamma)")
        ->capture_default_str();
    cmd->add_option("--theta", cfg.hinge_threshold, "Hinge threshold on unmatched-pair similarity")
        ->capture_default_str();
    cmd->add_option("--reg", cfg.sinkhorn_reg, "Entropic regularization of the transport plan")->capture_default_str();
    cmd->add_option("--iters", cfg.sinkhorn_max_iters, "Sinkhorn iteration budget")->capture_default_str();
    cmd->add_option("--tol", cfg.sinkhorn_tol, "Sinkhorn marginal tolerance")->capture_default_str();
}

// Writes to --out when given, otherwise to the command's output channel.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
    if (path.empty()) {
        fn(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    fn(file);
}

std::vector<SimilarityBlocks> stream_pairs(const DetectionStream& stream) {
    std::vector<SimilarityBlocks> pairs;
    for (std::size_t k = 1; k < stream.frames.size(); ++k) {
        pairs.push_back(partition_similarity(stream.frames[k - 1], stream.frames[k]));
    }
    return pairs;
}

void run_simulate(SimulateArgs& args, std::ostream& out) {
    if (args.model == "uniform") {
        args.cfg.entry_exit_model = EntryExitModel::Uniform;
    } else if (args.model == "persistent") {
        args.cfg.entry_exit_model = EntryExitModel::Persistent;
    } else {
        throw DataError("unknown entry/exit model '" + args.model + "'");
    }
    const auto stream = generate_scene(args.cfg);
    emit(args.out, out, [&](std::ostream& os) { write_stream(stream, os); });
}

CountReportFile count_one(const std::string& path, const McpConfig& cfg) {
    const auto stream = parse_stream(std::filesystem::path(path));
    CountReportFile file;
    file.video_id = std::filesystem::path(path).stem().string();
    file.num_frames = static_cast<int>(stream.frames.size());
    file.delta = stream.delta;
    if (stream.has_gt_ids() && !stream.empty()) {
        file.gt_count = gt_unique_count(stream);
    } else if (stream.empty()) {
        file.gt_count = 0;
    }
    file.config = cfg;
    file.report = count_video(stream, cfg);
    return file;
}

void run_count(CountArgs& args, std::ostream& out) {
    args.cfg.aggregator = parse_aggregator(args.aggregator);
    args.cfg.validate();
    if (!args.report.empty() && args.inputs.size() != 1) {
        throw DataError("--report takes a single --in; use --report-dir for several inputs");
    }
    // each video owns its memory state; videos are independent
    std::vector<std::future<CountReportFile>> jobs;
    for (const auto& path : args.inputs) {
        jobs.push_back(std::async(std::launch::async, count_one, path, args.cfg));
    }
    std::vector<CountReportFile> files;
    for (auto& job : jobs) {
        files.push_back(job.get());
    }
    for (const auto& file : files) {
        std::string target = args.report;
        if (!args.report_dir.empty()) {
            target = (std::filesystem::path(args.report_dir) / (file.video_id + ".json")).string();
        }
        if (!target.empty()) {
            emit(target, out, [&](std::ostream& os) { write_count_report(file, os); });
        }
        Json line{{"video", file.video_id}, {"frames", file.num_frames}, {"total", file.report.total}};
        line["gt_count"] = file.gt_count ? Json(*file.gt_count) : Json(nullptr);
        out << line.dump() << '\n';
    }
}

void run_eval(const EvalArgs& args, std::ostream& out) {
    std::vector<VideoResult> results;
    for (const auto& spec : args.reports) {
        std::string path = spec;
        std::optional<double> gt;
        // FILE:GT overrides the ground truth recorded in the report
        const auto colon = spec.rfind(':');
        if (colon != std::string::npos && !std::filesystem::exists(spec)) {
            path = spec.substr(0, colon);
            try {
                gt = std::stod(spec.substr(colon + 1));
            } catch (const std::exception&) {
                throw DataError("bad ground-truth count in '" + spec + "'");
            }
        }
        const auto file = parse_count_report(std::filesystem::path(path));
        if (!gt && !file.gt_count) {
            throw DataError("report '" + path + "' carries no ground-truth count; pass FILE:GT");
        }
        VideoResult r;
        r.video_id = file.video_id;
        r.length = static_cast<double>(file.num_frames);
        r.gt_count = gt ? *gt : static_cast<double>(*file.gt_count);
        r.pred_count = static_cast<double>(file.report.total);
        results.push_back(std::move(r));
    }
    if (results.empty()) {
        throw DataError("no reports given");
    }
    out << std::left << std::setw(24) << "video" << std::right << std::setw(8) << "frames" << std::setw(10) << "gt"
        << std::setw(10) << "pred" << '\n';
    for (const auto& r : results) {
        out << std::left << std::setw(24) << r.video_id << std::right << std::setw(8) << r.length << std::setw(10)
            << r.gt_count << std::setw(10) << r.pred_count << '\n';
    }
    out << std::fixed << std::setprecision(4);
    out << "MAE  " << mae(results) << '\n';
    out << "MSE  " << mse(results) << '\n';
    out << "WRAE " << wrae(results) << " %\n";
}

void run_loss(LossArgs& args, std::ostream& out) {
    args.cfg.validate();
    const auto stream = parse_stream(std::filesystem::path(args.input));
    emit(args.out, out, [&](std::ostream& os) {
        double total = 0.0;
        std::size_t k = 1;
        for (const auto& blocks : stream_pairs(stream)) {
            const auto scon = soft_contrastive_loss(blocks, args.cfg);
            const double hinge = hinge_loss(blocks.s3(), args.cfg.hinge_threshold);
            total += scon.loss + hinge;
            Json line{{"prev", stream.frames[k - 1].frame_index},
                      {"curr", stream.frames[k].frame_index},
                      {"m", blocks.shared()},
                      {"scon", scon.loss},
                      {"scon_raw", scon.raw},
                      {"hinge", hinge},
                      {"converged", scon.plan.converged},
                      {"iters", scon.plan.iterations_used}};
            os << line.dump() << '\n';
            ++k;
        }
        os << Json{{"gml", total}, {"pairs", stream.frames.empty() ? 0 : stream.frames.size() - 1}}.dump() << '\n';
    });
}

int run_gradcheck(GradcheckArgs& args, std::ostream& out) {
    args.cfg.validate();
    std::vector<SimilarityBlocks> all;
    if (!args.input.empty()) {
        for (auto& b : stream_pairs(parse_stream(std::filesystem::path(args.input)))) {
            if (b.shared() > 0) {
                all.push_back(std::move(b));
            }
        }
    } else {
        std::mt19937_64 rng(args.seed);
        for (int k = 0; k < args.count; ++k) {
            const int rows = std::uniform_int_distribution<int>(1, args.max_rows)(rng);
            const int cols = std::uniform_int_distribution<int>(1, args.max_cols)(rng);
            const int shared =
                std::uniform_int_distribution<int>(1, std::min({rows, cols, args.max_shared}))(rng);
            all.push_back(random_similarity_blocks(rng, rows, cols, shared, args.dim));
        }
    }
    double worst = 0.0;
    for (const auto& blocks : all) {
        const auto plan = soft_contrastive_loss(blocks, args.cfg).plan;
        const Matrix analytic = loss_gradient(blocks, plan.omega, args.cfg);
        const Matrix numeric = finite_difference_gradient(blocks, plan.omega, args.cfg, args.step);
        worst = std::max(worst, max_relative_error(analytic, numeric));
    }
    out << Json{{"blocks", all.size()}, {"max_rel_error", worst}, {"pass", worst < args.fail_above}}.dump() << '\n';
    return worst < args.fail_above ? kExitOk : kExitNumerical;
}

void run_pseudo(LossArgs& args, std::ostream& out) {
    args.cfg.validate();
    const auto stream = parse_stream(std::filesystem::path(args.input));
    const auto result = pseudo_trajectories(stream, args.cfg);
    emit(args.out, out, [&](std::ostream& os) {
        for (const auto& pm : result.pairs) {
            Json matches = Json::array();
            for (const auto& [p, c] : pm.matches) {
                matches.push_back(Json::array({p, c}));
            }
            os << Json{{"prev", pm.prev_frame}, {"curr", pm.curr_frame}, {"matches", std::move(matches)}}.dump()
               << '\n';
        }
        for (const auto& t : result.trajectories) {
            Json points = Json::array();
            for (const auto& [f, d] : t.points) {
                points.push_back(Json::array({f, d}));
            }
            os << Json{{"trajectory", t.id}, {"points", std::move(points)}}.dump() << '\n';
        }
    });
}

std::string one_line(std::string msg) {
    for (auto& ch : msg) {
        if (ch == '\n' || ch == '\r') {
            ch = ' ';
        }
    }
    return msg;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weakly supervised video individual counting toolkit", "wvic"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic detection stream");
    simulate->add_option("--identities", sim.cfg.num_identities)->capture_default_str();
    simulate->add_option("--frames", sim.cfg.num_frames)->capture_default_str();
    simulate->add_option("--delta", sim.cfg.delta, "Sampling interval in seconds")->capture_default_str();
    simulate->add_option("--dim", sim.cfg.feature_dim)->capture_default_str();
    simulate->add_option("--sigma", sim.cfg.feature_noise_sigma, "Per-coordinate feature noise")
        ->capture_default_str();
    simulate->add_option("--model", sim.model, "Entry/exit model: uniform or persistent")->capture_default_str();
    simulate->add_option("--reentry", sim.cfg.reentry_probability)->capture_default_str();
    simulate->add_option("--max-absence", sim.cfg.max_absence_steps)->capture_default_str();
    simulate->add_option("--max-sim", sim.cfg.max_base_similarity, "Bound on pairwise base-feature |cosine|")
        ->capture_default_str();
    simulate->add_option("--width", sim.cfg.scene_width)->capture_default_str();
    simulate->add_option("--height", sim.cfg.scene_height)->capture_default_str();
    simulate->add_option("--walk", sim.cfg.walk_step_sigma)->capture_default_str();
    simulate->add_option("--seed", sim.cfg.seed)->capture_default_str();
    simulate->add_option("--out", sim.out, "Output stream file (default: stdout)");

    CountArgs cnt;
    auto* count = app.add_subcommand("count", "Count unique individuals in one or more streams");
    count->add_option("--in", cnt.inputs, "Stream file(s)")->required();
    count->add_option("--zeta", cnt.cfg.zeta)->capture_default_str();
    count->add_option("--ttlmax", cnt.cfg.ttlmax)->capture_default_str();
    count->add_option("--memmax", cnt.cfg.memmax)->capture_default_str();
    count->add_option("--aggregator", cnt.aggregator, "max, min or mean")->capture_default_str();
    count->add_option("--report", cnt.report, "Write the full count report (single input)");
    count->add_option("--report-dir", cnt.report_dir, "Write one report per input into this directory");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "MAE / MSE / WRAE over count reports");
    eval->add_option("reports", ev.reports, "Report files, optionally FILE:GT")->required();

    LossArgs ls;
    auto* loss = app.add_subcommand("loss", "Group-level matching loss over a stream's frame pairs");
    loss->add_option("--in", ls.input)->required();
    loss->add_option("--out", ls.out);
    add_loss_flags(loss, ls.cfg);

    GradcheckArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference loss gradients");
    gradcheck->add_option("--in", gc.input, "Stream file (default: random blocks)");
    gradcheck->add_option("--seed", gc.seed)->capture_default_str();
    gradcheck->add_option("--count", gc.count)->capture_default_str();
    gradcheck->add_option("--max-rows", gc.max_rows)->capture_default_str();
    gradcheck->add_option("--max-cols", gc.max_cols)->capture_default_str();
    gradcheck->add_option("--max-shared", gc.max_shared)->capture_default_str();
    gradcheck->add_option("--dim", gc.dim)->capture_default_str();
    gradcheck->add_option("--step", gc.step)->capture_default_str();
    gradcheck->add_option("--fail-above", gc.fail_above)->capture_default_str();
    add_loss_flags(gradcheck, gc.cfg);

    LossArgs ps;
    auto* pseudo = app.add_subcommand("pseudo", "Export pseudo-trajectory matchings as JSON Lines");
    pseudo->add_option("--in", ps.input)->required();
    pseudo->add_option("--out", ps.out);
    add_loss_flags(pseudo, ps.cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "wvic: usage error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    try {
        if (*simulate) {
            run_simulate(sim, out);
        } else if (*count) {
            run_count(cnt, out);
        } else if (*eval) {
            run_eval(ev, out);
        } else if (*loss) {
            run_loss(ls, out);
        } else if (*gradcheck) {
            return run_gradcheck(gc, out);
        } else if (*pseudo) {
            run_pseudo(ps, out);
        }
    } catch (const NumericalError& e) {
        err << "wvic: numerical error: " << one_line(e.what()) << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "wvic: error: " << one_line(e.what()) << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace wvic
