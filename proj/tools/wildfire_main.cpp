// Command-line front end: train / eval / predict-grid / synth.
//
// Exit codes: 0 success, 2 usage, 3 data, 4 numeric divergence, 5 integrity.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "wildfire/checkpoint.hpp"
#include "wildfire/data/dataset.hpp"
#include "wildfire/data/resample.hpp"
#include "wildfire/data/synthetic.hpp"
#include "wildfire/grid.hpp"
#include "wildfire/metrics.hpp"
#include "wildfire/model_io.hpp"
#include "wildfire/models/hybrid.hpp"

namespace fs = std::filesystem;
using namespace wildfire;

namespace {

// ---- shared option bundles --------------------------------------------------

struct TrainOptions {
    std::string data_path;
    std::string image_dir;
    std::string out_dir = "saved_progress";
    std::string veg_map_path;

    bool with_vegetation = true;
    bool satellite_img = false;
    bool gray_scale = true;
    std::string resample_method = "none";  // none | undersampling | smote
    double other_size = 1.8;
    double test_size = 0.2;
    bool archive = true;
    std::uint64_t seed = 42;
    std::string model_selection = "baseline model";
    std::string loss_function = "mse";
    double learning_rate = 0.01;
    int epochs = 100;
    int display_step = 10;
    double threshold = 0.5;
    bool batch = false;
    int batch_size = 32;
    bool standardize = true;
    int smote_k = 5;
    int smote_amount = 0;  // 0 = top the minority up to parity
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v, int digits = 4) {
    return v ? fmt(*v, digits) : std::string("n/a");
}

std::string timestamp_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

data::VegetationMap load_veg_map(const std::string& path) {
    if (path.empty()) return data::VegetationMap::defaults();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vegetation map " + path);
    return data::VegetationMap::from_csv(in);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

// Probabilities from the baseline net in manageable slices.
std::vector<double> baseline_scores(models::BaselineNet& net, const Tensor& x) {
    const int n = x.dim(0), d = x.dim(1);
    std::vector<double> scores;
    scores.reserve(n);
    const int chunk = 1024;
    for (int at = 0; at < n; at += chunk) {
        const int len = std::min(chunk, n - at);
        Tensor part(Shape{len, d});
        std::copy(x.values().begin() + static_cast<std::ptrdiff_t>(at) * d,
                  x.values().begin() + static_cast<std::ptrdiff_t>(at + len) * d,
                  part.values().begin());
        Tensor p = net.forward(part, Mode::Eval);
        for (double v : p.values()) scores.push_back(v);
    }
    return scores;
}

metrics::ConfusionMatrix confusion_at(const std::vector<int>& labels,
                                      const std::vector<double>& scores,
                                      double threshold) {
    std::vector<int> predicted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        predicted[i] = models::classify(scores[i], threshold) ? 1 : 0;
    return metrics::confusion(labels, predicted);
}

void print_metrics_report(const metrics::ConfusionMatrix& m,
                          const std::vector<int>& labels,
                          const std::vector<double>& scores) {
    const metrics::Rates r = metrics::rates(m);
    std::cout << "confusion matrix (rows = actual 0/1, cols = predicted 0/1):\n";
    std::cout << "  " << std::setw(8) << m.tn << " " << std::setw(8) << m.fp << "\n";
    std::cout << "  " << std::setw(8) << m.fn << " " << std::setw(8) << m.tp << "\n";
    std::cout << "accuracy           " << fmt_opt(r.accuracy) << "\n";
    std::cout << "balanced accuracy  " << fmt_opt(r.balanced_accuracy) << "\n";
    std::cout << "tpr (sensitivity)  " << fmt_opt(r.tpr) << "\n";
    std::cout << "tnr (specificity)  " << fmt_opt(r.tnr) << "\n";
    std::cout << "precision          " << fmt_opt(r.precision) << "\n";
    std::cout << "f-score            " << fmt_opt(r.f1) << "\n";
    try {
        std::cout << "auc                " << fmt(metrics::roc(labels, scores).auc) << "\n";
    } catch (const DataError&) {
        std::cout << "auc                n/a (single-class labels)\n";
    }
}

std::string epoch_csv_baseline(const std::vector<models::EpochStats>& log) {
    std::ostringstream os;
    os << std::setprecision(17) << "epoch,loss,train_acc,test_acc\n";
    for (const models::EpochStats& e : log)
        os << e.epoch << "," << e.loss << "," << e.train_acc << "," << e.test_acc << "\n";
    return os.str();
}

std::string epoch_csv_hybrid(const std::vector<models::HybridEpochStats>& log) {
    std::ostringstream os;
    os << std::setprecision(17) << "epoch,loss,test_acc,tpr,tnr\n";
    for (const models::HybridEpochStats& e : log)
        os << e.epoch << "," << e.loss << "," << e.test_acc << "," << e.tpr << ","
           << e.tnr << "\n";
    return os.str();
}

std::string batch_csv(const std::vector<models::HybridBatchStats>& log) {
    std::ostringstream os;
    os << std::setprecision(17) << "epoch,batch,step,loss\n";
    for (const models::HybridBatchStats& b : log)
        os << b.epoch << "," << b.batch << "," << b.step << "," << b.loss << "\n";
    return os.str();
}

void write_parameters_txt(const fs::path& path, const TrainOptions& opt,
                          const nn::ParamList& params, int width,
                          std::size_t train_rows, std::size_t test_rows,
                          std::size_t dropped) {
    std::ofstream out = open_out(path);
    out << "model: " << opt.model_selection << "\n";
    out << "seed: " << opt.seed << "\n";
    out << "loss-function: " << opt.loss_function << "\n";
    out << "learning-rate: " << opt.learning_rate << "\n";
    out << "epochs: " << opt.epochs << "\n";
    out << "threshold: " << opt.threshold << "\n";
    out << "with-vegetation: " << (opt.with_vegetation ? "true" : "false") << "\n";
    out << "standardize: " << (opt.standardize ? "true" : "false") << "\n";
    out << "resample-method: " << opt.resample_method << "\n";
    out << "other-size: " << opt.other_size << "\n";
    out << "test-size: " << opt.test_size << "\n";
    out << "batch: " << (opt.batch ? "true" : "false") << "\n";
    out << "batch-size: " << opt.batch_size << "\n";
    out << "feature-width: " << width << "\n";
    out << "train-rows: " << train_rows << "\n";
    out << "test-rows: " << test_rows << "\n";
    out << "dropped-rows: " << dropped << "\n";
    out << "tensors:\n";
    for (const nn::NamedTensor& t : params)
        out << "  " << t.name << " " << shape_str(t.tensor.shape()) << " "
            << t.tensor.size() << (t.learnable ? "" : " (stat)") << "\n";
    out << "total-learnable: " << nn::param_count(params) << "\n";
}

void write_shuffle_index(const fs::path& path, const data::SplitPlan& plan) {
    std::ofstream out = open_out(path);
    for (std::size_t i : plan.train) out << "train " << i << "\n";
    for (std::size_t i : plan.test) out << "test " << i << "\n";
}

// ---- train ------------------------------------------------------------------

int run_train(const TrainOptions& opt, bool batch_size_given) {
    const bool hybrid = opt.model_selection == "hybrid model";
    if (!opt.gray_scale)
        throw ConfigError("--gray-scale=false: only the grayscale pipeline is implemented");
    if (hybrid && opt.image_dir.empty())
        throw ConfigError("--model-selection='hybrid model' needs --images=<tile dir>");
    if (!hybrid && opt.satellite_img)
        throw ConfigError("--satellite-img=true needs --model-selection='hybrid model'");
    if (batch_size_given && !opt.batch)
        throw ConfigError("--batch-size needs --batch=true");
    if (opt.batch && !hybrid)
        throw ConfigError("--batch=true: the baseline model trains full-batch");
    if (hybrid && opt.resample_method == "smote")
        throw ConfigError("--resample-method='smote' synthesizes tabular rows only; "
                          "it cannot invent image tiles for the hybrid model");

    std::ifstream in(opt.data_path);
    if (!in) throw DataError("cannot open " + opt.data_path);
    const data::ParseResult parsed = data::parse_records(in);
    if (parsed.rows.empty()) throw DataError("no usable rows in " + opt.data_path);
    std::cout << "parsed " << parsed.rows.size() << " rows (" << parsed.dropped
              << " dropped for missing values)\n";

    const data::VegetationMap veg = load_veg_map(opt.veg_map_path);
    const data::Dataset ds = data::assemble_dataset(parsed.rows, veg,
                                                    opt.with_vegetation, hybrid,
                                                    opt.image_dir);

    data::SplitPlan plan;
    if (opt.resample_method == "undersampling") {
        plan = data::undersample(ds.labels, opt.other_size, opt.test_size, opt.seed);
    } else {
        plan = data::plain_split(ds.labels.size(), opt.test_size, opt.seed);
        plan.method = opt.resample_method;
    }

    auto gather_rows = [&](const Tensor& t, const std::vector<std::size_t>& idx) {
        Shape shape = t.shape();
        shape[0] = static_cast<int>(idx.size());
        Tensor out(shape);
        const std::size_t row = t.size() / t.dim(0);
        for (std::size_t r = 0; r < idx.size(); ++r)
            std::copy(t.values().begin() + static_cast<std::ptrdiff_t>(idx[r] * row),
                      t.values().begin() + static_cast<std::ptrdiff_t>((idx[r] + 1) * row),
                      out.values().begin() + static_cast<std::ptrdiff_t>(r * row));
        return out;
    };
    auto gather_labels = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out[i] = ds.labels[idx[i]];
        return out;
    };

    Tensor train_x = gather_rows(ds.features, plan.train);
    Tensor test_x = gather_rows(ds.features, plan.test);
    std::vector<int> train_y = gather_labels(plan.train);
    std::vector<int> test_y = gather_labels(plan.test);

    const data::Standardizer standardizer =
        opt.standardize ? data::Standardizer::fit(train_x)
                        : data::Standardizer::identity(ds.width);
    train_x = standardizer.apply(train_x);
    test_x = standardizer.apply(test_x);

    // SMOTE tops the training minority up in standardized space; the test
    // side stays untouched real data.
    if (opt.resample_method == "smote") {
        long long pos = 0;
        for (int y : train_y) pos += y;
        const long long neg = static_cast<long long>(train_y.size()) - pos;
        const int minority_label = pos <= neg ? 1 : 0;
        std::vector<std::vector<double>> minority;
        for (std::size_t r = 0; r < train_y.size(); ++r) {
            if (train_y[r] != minority_label) continue;
            auto v = train_x.values();
            minority.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(r) * ds.width,
                                  v.begin() + static_cast<std::ptrdiff_t>(r + 1) * ds.width);
        }
        const int amount = opt.smote_amount > 0
                               ? opt.smote_amount
                               : static_cast<int>(std::llabs(pos - neg));
        const auto synthetic =
            data::smote(minority, opt.smote_k, amount, opt.seed);
        Tensor widened(Shape{static_cast<int>(train_y.size() + synthetic.size()), ds.width});
        std::copy(train_x.values().begin(), train_x.values().end(),
                  widened.values().begin());
        auto wv = widened.values();
        for (std::size_t r = 0; r < synthetic.size(); ++r) {
            std::copy(synthetic[r].begin(), synthetic[r].end(),
                      wv.begin() + static_cast<std::ptrdiff_t>((train_y.size() + r) * ds.width));
            }
        train_x = widened;
        train_y.insert(train_y.end(), synthetic.size(), minority_label);
        std::cout << "smote: added " << synthetic.size() << " synthetic minority rows\n";
    }

    std::cout << "split: " << train_y.size() << " train / " << test_y.size()
              << " test (method " << plan.method << ")\n";

    const models::LossKind loss = opt.loss_function == "cross-entropy"
                                      ? models::LossKind::CrossEntropy
                                      : models::LossKind::Mse;

    // Everything the archive needs, collected per model branch.
    std::string epoch_csv, batches_csv;
    std::vector<double> test_scores;
    nn::ParamList params;

    fs::path archive_dir;
    if (opt.archive) {
        archive_dir = fs::path(opt.out_dir) /
                      ("run_" + timestamp_now() + "_seed" + std::to_string(opt.seed));
        for (int suffix = 2; fs::exists(archive_dir); ++suffix)
            archive_dir = fs::path(opt.out_dir) /
                          ("run_" + timestamp_now() + "_seed" + std::to_string(opt.seed) +
                           "-" + std::to_string(suffix));
        fs::create_directories(archive_dir);
    }

    if (!hybrid) {
        models::BaselineConfig cfg;
        cfg.input_dim = ds.width;
        cfg.loss = loss;
        cfg.learning_rate = opt.learning_rate;
        cfg.weight_decay = 1e-4;
        cfg.epochs = opt.epochs;
        models::BaselineNet net(cfg, opt.seed);
        std::cout << "model: baseline (" << net.param_count()
                  << " learnable parameters)\n";

        const std::vector<models::EpochStats> log =
            models::train_baseline(net, train_x, train_y, test_x, test_y);
        for (const models::EpochStats& e : log)
            if (e.epoch % opt.display_step == 0 || e.epoch == cfg.epochs - 1)
                std::cout << "epoch " << e.epoch << ": loss " << fmt(e.loss)
                          << " train_acc " << fmt(e.train_acc) << " test_acc "
                          << fmt(e.test_acc) << "\n";

        epoch_csv = epoch_csv_baseline(log);
        {
            // Full-batch: the batch curve is the epoch curve, one step apiece.
            std::ostringstream os;
            os << std::setprecision(17) << "epoch,batch,step,loss\n";
            for (const models::EpochStats& e : log)
                os << e.epoch << ",0," << e.epoch << "," << e.loss << "\n";
            batches_csv = os.str();
        }
        test_scores = baseline_scores(net, test_x);
        params = net.params("baseline");
        if (opt.archive) {
            const std::string digest_src = epoch_csv;
            io::save_baseline((archive_dir / "checkpoint.bin").string(), net,
                              standardizer, opt.seed,
                              io::fnv1a64(digest_src.data(), digest_src.size()),
                              opt.with_vegetation);
        }
    } else {
        models::HybridConfig cfg;
        cfg.tabular_width = ds.width;
        cfg.loss = loss;
        cfg.learning_rate = opt.learning_rate;
        cfg.weight_decay = 1e-4;
        cfg.epochs = opt.epochs;
        cfg.batch_size = opt.batch_size;
        cfg.threshold = opt.threshold;
        models::HybridModel model(cfg, opt.seed);
        std::cout << "model: hybrid (" << model.param_count()
                  << " learnable parameters)\n";

        Tensor train_img = gather_rows(ds.images, plan.train);
        Tensor test_img = gather_rows(ds.images, plan.test);
        const models::HybridLog log =
            models::train_hybrid(model, train_x, train_img, train_y, test_x,
                                 test_img, test_y, opt.seed);
        for (const models::HybridEpochStats& e : log.epochs)
            if (e.epoch % opt.display_step == 0 || e.epoch == cfg.epochs - 1)
                std::cout << "epoch " << e.epoch << ": loss " << fmt(e.loss)
                          << " test_acc " << fmt(e.test_acc) << " tpr " << fmt(e.tpr)
                          << " tnr " << fmt(e.tnr) << "\n";

        epoch_csv = epoch_csv_hybrid(log.epochs);
        batches_csv = batch_csv(log.batches);
        test_scores = models::evaluate_hybrid(model, test_x, test_img, test_y).scores;
        params = model.params("hybrid");
        if (opt.archive) {
            const std::string digest_src = epoch_csv;
            io::save_hybrid((archive_dir / "checkpoint.bin").string(), model,
                            standardizer, opt.seed,
                            io::fnv1a64(digest_src.data(), digest_src.size()),
                            opt.with_vegetation);
        }
    }

    const metrics::ConfusionMatrix cm = confusion_at(test_y, test_scores, opt.threshold);
    print_metrics_report(cm, test_y, test_scores);

    if (opt.archive) {
        open_out(archive_dir / "loss_epoch.csv") << epoch_csv;
        open_out(archive_dir / "loss_batch.csv") << batches_csv;
        metrics::write_confusion_csv((archive_dir / "confusion.csv").string(), cm);
        try {
            const metrics::RocCurve curve = metrics::roc(test_y, test_scores);
            metrics::write_roc_csv((archive_dir / "roc.csv").string(), curve);
            metrics::write_roc_svg((archive_dir / "roc.svg").string(), curve);
        } catch (const DataError&) {
            // Single-class test labels: leave placeholder curves out rather
            // than fabricate one.
            open_out(archive_dir / "roc.csv") << "threshold,fpr,tpr\n";
            open_out(archive_dir / "roc.svg")
                << "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
        }
        write_parameters_txt(archive_dir / "parameters.txt", opt, params, ds.width,
                             train_y.size(), test_y.size(), parsed.dropped);
        write_shuffle_index(archive_dir / "shuffle_index.txt", plan);
        std::cout << "archive: " << archive_dir.string() << "\n";
    }
    return 0;
}

// ---- eval -------------------------------------------------------------------

int run_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& image_dir, const std::string& veg_map_path,
             double threshold) {
    const std::string kind = io::checkpoint_kind(checkpoint_path);
    std::ifstream in(data_path);
    if (!in) throw DataError("cannot open " + data_path);
    const data::ParseResult parsed = data::parse_records(in);
    if (parsed.rows.empty()) throw DataError("no usable rows in " + data_path);
    const data::VegetationMap veg = load_veg_map(veg_map_path);

    std::vector<double> scores;
    std::vector<int> labels;
    if (kind == "baseline") {
        io::SavedBaseline saved = io::load_baseline(checkpoint_path);
        const data::Dataset ds =
            data::assemble_dataset(parsed.rows, veg, saved.with_vegetation);
        if (ds.width != saved.net.config().input_dim)
            throw DataError("schema mismatch: checkpoint expects feature width " +
                            std::to_string(saved.net.config().input_dim) + ", data has " +
                            std::to_string(ds.width));
        scores = baseline_scores(saved.net, saved.standardizer.apply(ds.features));
        labels = ds.labels;
    } else if (kind == "hybrid") {
        if (image_dir.empty())
            throw ConfigError("a hybrid checkpoint needs --images=<tile dir>");
        io::SavedHybrid saved = io::load_hybrid(checkpoint_path);
        const data::Dataset ds = data::assemble_dataset(parsed.rows, veg,
                                                        saved.with_vegetation, true,
                                                        image_dir);
        if (ds.width != saved.model.config().tabular_width)
            throw DataError("schema mismatch: checkpoint expects feature width " +
                            std::to_string(saved.model.config().tabular_width) +
                            ", data has " + std::to_string(ds.width));
        scores = models::evaluate_hybrid(saved.model,
                                         saved.standardizer.apply(ds.features),
                                         ds.images, ds.labels)
                     .scores;
        labels = ds.labels;
    } else {
        throw IntegrityError("checkpoint kind '" + kind + "' is not runnable");
    }

    std::cout << "evaluated " << labels.size() << " rows with the " << kind
              << " checkpoint\n";
    print_metrics_report(confusion_at(labels, scores, threshold), labels, scores);
    return 0;
}

// ---- predict-grid -----------------------------------------------------------

std::vector<double> parse_info_row(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string cell;
    while (std::getline(is, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("--info-row entry '" + cell + "' is not a number");
        }
    }
    return out;
}

int run_grid(const std::string& checkpoint_path, const std::string& image_dir,
             const std::string& info_row_csv, int rows, int cols,
             double origin_lat, double origin_lon, const std::string& out_dir,
             bool dump_stage_maps) {
    if (io::checkpoint_kind(checkpoint_path) != "hybrid")
        throw ConfigError("predict-grid needs a hybrid checkpoint (tiles drive the model)");
    io::SavedHybrid saved = io::load_hybrid(checkpoint_path);
    const std::vector<double> info_row = parse_info_row(info_row_csv);

    const int n = rows * cols;
    const int hw = saved.model.config().wiin.input_hw;
    Tensor tiles(Shape{n, 1, hw, hw});
    std::vector<int> missing;
    for (int i = 0; i < n; ++i) {
        const std::string stem = (fs::path(image_dir) / ("tile_" + std::to_string(i))).string();
        std::string path;
        if (fs::exists(stem + ".pgm")) {
            path = stem + ".pgm";
        } else if (fs::exists(stem + ".png")) {
            path = stem + ".png";
        } else {
            missing.push_back(i);
            continue;
        }
        const data::GrayImage img = data::load_gray_image(path);
        std::copy(img.pixels.begin(), img.pixels.end(),
                  tiles.values().begin() + static_cast<std::ptrdiff_t>(i) * hw * hw);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
            list += (i ? ", " : "") + std::to_string(missing[i]);
        if (missing.size() > 10)
            list += ", ... (" + std::to_string(missing.size()) + " total)";
        throw DataError("missing tile image for index " + list + " under " + image_dir);
    }

    const grid::ProbabilityGrid g =
        grid::predict_grid(saved.model, saved.standardizer, info_row, tiles, rows,
                           cols, origin_lat, origin_lon);
    fs::create_directories(out_dir);
    grid::write_grid_csv((fs::path(out_dir) / "grid.csv").string(), g);
    grid::write_grid_pgm((fs::path(out_dir) / "heatmap.pgm").string(), g);

    if (dump_stage_maps) {
        // Stage feature maps for the first tile, as PGM files.
        Tensor first(Shape{1, 1, hw, hw});
        std::copy(tiles.values().begin(), tiles.values().begin() + hw * hw,
                  first.values().begin());
        models::StageCapture capture;
        saved.model.wiin().forward(first, Mode::Eval, &capture);
        models::dump_stages(capture, out_dir);
    }

    int flagged = 0;
    for (const grid::GridCell& c : g.cells) flagged += c.flag_gt_70 ? 1 : 0;
    std::cout << "grid: " << g.cells.size() << " cells, " << flagged
              << " above the 0.70 flag\n";
    std::cout << "wrote " << (fs::path(out_dir) / "grid.csv").string() << " and "
              << (fs::path(out_dir) / "heatmap.pgm").string() << "\n";
    return 0;
}

// ---- synth ------------------------------------------------------------------

int run_synth(const std::string& out_dir, int rows, std::uint64_t seed,
              int grid_rows, int grid_cols) {
    const data::SyntheticCorpus corpus = data::synthetic_corpus(rows, seed);
    fs::create_directories(fs::path(out_dir) / "images");
    {
        std::ofstream out = open_out(fs::path(out_dir) / "data.csv");
        data::write_corpus_csv(out, corpus.rows);
    }
    for (const data::GrayImage& tile : corpus.tiles)
        data::write_pgm((fs::path(out_dir) / "images" /
                         (std::to_string(tile.source_id) + ".pgm"))
                            .string(),
                        tile.width, tile.height, tile.pixels);
    std::cout << "wrote " << corpus.rows.size() << " rows to "
              << (fs::path(out_dir) / "data.csv").string() << " and tiles under "
              << (fs::path(out_dir) / "images").string() << "\n";

    if (grid_rows > 0 && grid_cols > 0) {
        Rng rng(Rng::derive(seed, 9));
        fs::create_directories(fs::path(out_dir) / "grid_tiles");
        std::vector<double> px(100 * 100);
        for (int i = 0; i < grid_rows * grid_cols; ++i) {
            const double base = rng.uniform(0.2, 0.8);
            for (double& p : px) {
                p = base + rng.uniform(-0.1, 0.1);
                p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
            }
            data::write_pgm((fs::path(out_dir) / "grid_tiles" /
                             ("tile_" + std::to_string(i) + ".pgm"))
                                .string(),
                            100, 100, px);
        }
        std::cout << "wrote " << grid_rows * grid_cols << " grid tiles under "
                  << (fs::path(out_dir) / "grid_tiles").string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wildfire-cause forecasting: tabular baseline and imagery hybrid"};
    app.require_subcommand(1);

    // train ---------------------------------------------------------------
    TrainOptions topt;
    CLI::App* train = app.add_subcommand("train", "Train a model and archive the run");
    train->add_option("--data", topt.data_path, "Input CSV (documented schema)")
        ->required()->check(CLI::ExistingFile);
    train->add_option("--images", topt.image_dir,
                      "Directory of <fod_id>.pgm/.png tiles (hybrid model)");
    train->add_option("--out", topt.out_dir, "Archive parent directory")
        ->capture_default_str();
    train->add_option("--veg-map", topt.veg_map_path,
                      "Override the 28->6 vegetation grouping (CSV veg_category,group)")
        ->check(CLI::ExistingFile);
    train->add_option("--with-vegetation", topt.with_vegetation,
                      "Include the 6-wide vegetation block as features")
        ->capture_default_str();
    train->add_option("--satellite-img", topt.satellite_img,
                      "Use satellite imagery (requires the hybrid model)")
        ->capture_default_str();
    train->add_option("--gray-scale", topt.gray_scale,
                      "Process imagery as grayscale (the only supported mode)")
        ->capture_default_str();
    train->add_option("--resample-method", topt.resample_method,
                      "Class rebalancing: none, undersampling, or smote")
        ->check(CLI::IsMember({"none", "undersampling", "smote"}))
        ->capture_default_str();
    train->add_option("--other-size", topt.other_size,
                      "Undersampling: majority rows kept per minority row")
        ->capture_default_str();
    train->add_option("--test-size", topt.test_size, "Test fraction of the split pool")
        ->capture_default_str();
    train->add_option("--archive", topt.archive, "Write the saved-progress archive")
        ->capture_default_str();
    train->add_option("--seed", topt.seed, "RNG seed; fixes init, splits, dropout")
        ->capture_default_str();
    train->add_option("--model-selection", topt.model_selection,
                      "'baseline model' or 'hybrid model'")
        ->check(CLI::IsMember({"baseline model", "hybrid model"}))
        ->capture_default_str();
    train->add_option("--loss-function", topt.loss_function, "mse or cross-entropy")
        ->check(CLI::IsMember({"mse", "cross-entropy"}))
        ->capture_default_str();
    train->add_option("--learning-rate", topt.learning_rate, "Adam learning rate")
        ->capture_default_str();
    train->add_option("--epochs", topt.epochs, "Training epochs")
        ->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--display-step", topt.display_step,
                      "Print a log line every N epochs")
        ->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--threshold", topt.threshold,
                      "Decision threshold (strictly greater wins class 1)")
        ->capture_default_str();
    train->add_option("--batch", topt.batch,
                      "Mini-batch training (hybrid model only)")
        ->capture_default_str();
    CLI::Option* batch_size_opt =
        train->add_option("--batch-size", topt.batch_size, "Mini-batch row count")
            ->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--standardize", topt.standardize,
                      "Z-score features with train statistics")
        ->capture_default_str();
    train->add_option("--smote-k", topt.smote_k, "SMOTE neighborhood size")
        ->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--smote-amount", topt.smote_amount,
                      "SMOTE synthetic rows (0 = up to class parity)")
        ->capture_default_str();

    // eval ----------------------------------------------------------------
    std::string eval_checkpoint, eval_data, eval_images, eval_veg_map;
    double eval_threshold = 0.5;
    CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on a labeled CSV");
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--data", eval_data, "Input CSV (documented schema)")
        ->required()->check(CLI::ExistingFile);
    eval->add_option("--images", eval_images, "Tile directory (hybrid checkpoints)");
    eval->add_option("--veg-map", eval_veg_map, "Vegetation grouping override")
        ->check(CLI::ExistingFile);
    eval->add_option("--threshold", eval_threshold, "Decision threshold")
        ->capture_default_str();

    // predict-grid ----------------------------------------------------------
    std::string grid_checkpoint, grid_images, grid_info_row, grid_out = "grid_out";
    int grid_rows = 0, grid_cols = 0;
    double grid_lat = 0.0, grid_lon = 0.0;
    bool grid_dump_stages = false;
    CLI::App* pgrid = app.add_subcommand(
        "predict-grid", "Score a tile grid with one shared tabular info row");
    pgrid->add_option("--checkpoint", grid_checkpoint, "Hybrid checkpoint file")
        ->required()->check(CLI::ExistingFile);
    pgrid->add_option("--images", grid_images,
                      "Directory of tile_<index>.pgm/.png, row-major")
        ->required()->check(CLI::ExistingDirectory);
    pgrid->add_option("--info-row", grid_info_row,
                      "Comma-separated feature row shared by every tile")
        ->required();
    pgrid->add_option("--rows", grid_rows, "Grid rows")
        ->required()->check(CLI::PositiveNumber);
    pgrid->add_option("--cols", grid_cols, "Grid columns")
        ->required()->check(CLI::PositiveNumber);
    pgrid->add_option("--origin-lat", grid_lat, "Northwest corner latitude")
        ->required();
    pgrid->add_option("--origin-lon", grid_lon, "Northwest corner longitude")
        ->required();
    pgrid->add_option("--out", grid_out, "Output directory")->capture_default_str();
    pgrid->add_flag("--dump-stages", grid_dump_stages,
                    "Also write stage feature maps of tile 0 as PGM files");

    // synth -----------------------------------------------------------------
    std::string synth_out = "synth_data";
    int synth_rows = 900, synth_grid_rows = 0, synth_grid_cols = 0;
    std::uint64_t synth_seed = 42;
    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a synthetic dataset in the documented schema");
    synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
    synth->add_option("--rows", synth_rows, "Row count (every third is natural-cause)")
        ->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();
    synth->add_option("--grid-rows", synth_grid_rows,
                      "Also write a demo tile grid with this many rows")
        ->capture_default_str();
    synth->add_option("--grid-cols", synth_grid_cols, "Demo tile grid columns")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed()) return run_train(topt, batch_size_opt->count() > 0);
        if (eval->parsed())
            return run_eval(eval_checkpoint, eval_data, eval_images, eval_veg_map,
                            eval_threshold);
        if (pgrid->parsed())
            return run_grid(grid_checkpoint, grid_images, grid_info_row, grid_rows,
                            grid_cols, grid_lat, grid_lon, grid_out, grid_dump_stages);
        if (synth->parsed())
            return run_synth(synth_out, synth_rows, synth_seed, synth_grid_rows,
                             synth_grid_cols);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const OptimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {  // parse / data / dimension
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
