#include "wildfire/model_io.hpp"

#include <iomanip>
#include <sstream>

namespace wildfire::io {
namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

const std::string& need(const Checkpoint& c, const std::string& key) {
    auto it = c.config.find(key);
    if (it == c.config.end())
        throw IntegrityError("checkpoint: config key '" + key + "' is missing");
    return it->second;
}

int to_int(const std::string& s, const std::string& key) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw IntegrityError("checkpoint: config " + key + " = '" + s +
                             "' is not an integer");
    }
}

double to_double(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw IntegrityError("checkpoint: config " + key + " = '" + s +
                             "' is not a number");
    }
}

std::vector<int> to_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string cell;
    while (std::getline(is, cell, ',')) out.push_back(to_int(cell, key));
    return out;
}

std::string loss_name(models::LossKind loss) {
    return loss == models::LossKind::Mse ? "mse" : "cross-entropy";
}

models::LossKind loss_from(const std::string& s) {
    if (s == "mse") return models::LossKind::Mse;
    if (s == "cross-entropy") return models::LossKind::CrossEntropy;
    throw IntegrityError("checkpoint: unknown loss '" + s + "'");
}

void append_standardizer(Checkpoint& c, const data::Standardizer& s) {
    const int d = static_cast<int>(s.mean.size());
    c.tensors.push_back({"std.mean", Tensor(Shape{d}, s.mean), false});
    c.tensors.push_back({"std.stdev", Tensor(Shape{d}, s.stdev), false});
}

// The model's own buffers must line up one-to-one, in order, with the
// leading manifest entries; the two standardizer tensors follow.
data::Standardizer restore_params(const Checkpoint& c, const nn::ParamList& model) {
    if (c.tensors.size() != model.size() + 2)
        throw IntegrityError("checkpoint: carries " + std::to_string(c.tensors.size()) +
                             " tensors, the model needs " +
                             std::to_string(model.size()) + " plus 2 standardizer rows");
    for (std::size_t i = 0; i < model.size(); ++i) {
        const nn::NamedTensor& have = c.tensors[i];
        const nn::NamedTensor& want = model[i];
        if (have.name != want.name)
            throw IntegrityError("checkpoint: tensor " + std::to_string(i) + " is '" +
                                 have.name + "', the model expects '" + want.name + "'");
        if (have.tensor.shape() != want.tensor.shape())
            throw IntegrityError("checkpoint: tensor '" + have.name + "' has shape " +
                                 shape_str(have.tensor.shape()) + ", the model expects " +
                                 shape_str(want.tensor.shape()));
        auto src = have.tensor.values();
        Tensor target = want.tensor;  // shared node: writes land in the model
        std::copy(src.begin(), src.end(), target.values().begin());
    }
    const nn::NamedTensor& mean = c.tensors[model.size()];
    const nn::NamedTensor& stdev = c.tensors[model.size() + 1];
    if (mean.name != "std.mean" || stdev.name != "std.stdev")
        throw IntegrityError("checkpoint: standardizer tensors missing or misplaced");
    if (mean.tensor.shape() != stdev.tensor.shape())
        throw IntegrityError("checkpoint: standardizer mean/stdev shapes disagree");
    data::Standardizer s;
    s.mean.assign(mean.tensor.values().begin(), mean.tensor.values().end());
    s.stdev.assign(stdev.tensor.values().begin(), stdev.tensor.values().end());
    return s;
}

}  // namespace

void save_baseline(const std::string& path, const models::BaselineNet& net,
                   const data::Standardizer& standardizer, std::uint64_t seed,
                   std::uint64_t log_digest, bool with_vegetation) {
    const models::BaselineConfig& cfg = net.config();
    Checkpoint c;
    c.kind = "baseline";
    c.seed = seed;
    c.log_digest = log_digest;
    c.config["input_dim"] = std::to_string(cfg.input_dim);
    c.config["hidden"] = fmt_int_list(cfg.hidden);
    c.config["bn_last"] = cfg.batchnorm_on_last_hidden ? "1" : "0";
    c.config["loss"] = loss_name(cfg.loss);
    c.config["learning_rate"] = fmt_double(cfg.learning_rate);
    c.config["weight_decay"] = fmt_double(cfg.weight_decay);
    c.config["epochs"] = std::to_string(cfg.epochs);
    c.config["with_vegetation"] = with_vegetation ? "1" : "0";
    c.tensors = net.params("baseline");
    append_standardizer(c, standardizer);
    save_checkpoint(path, c);
}

SavedBaseline load_baseline(const std::string& path) {
    Checkpoint c = load_checkpoint(path);
    if (c.kind != "baseline")
        throw IntegrityError("checkpoint " + path + " holds a '" + c.kind +
                             "' model, expected 'baseline'");
    models::BaselineConfig cfg;
    cfg.input_dim = to_int(need(c, "input_dim"), "input_dim");
    cfg.hidden = to_int_list(need(c, "hidden"), "hidden");
    cfg.batchnorm_on_last_hidden = need(c, "bn_last") == "1";
    cfg.loss = loss_from(need(c, "loss"));
    cfg.learning_rate = to_double(need(c, "learning_rate"), "learning_rate");
    cfg.weight_decay = to_double(need(c, "weight_decay"), "weight_decay");
    cfg.epochs = to_int(need(c, "epochs"), "epochs");

    SavedBaseline out;
    out.net = models::BaselineNet(cfg, c.seed);
    out.standardizer = restore_params(c, out.net.params("baseline"));
    out.seed = c.seed;
    out.log_digest = c.log_digest;
    out.with_vegetation = need(c, "with_vegetation") == "1";
    return out;
}

void save_hybrid(const std::string& path, const models::HybridModel& model,
                 const data::Standardizer& standardizer, std::uint64_t seed,
                 std::uint64_t log_digest, bool with_vegetation) {
    const models::HybridConfig& cfg = model.config();
    Checkpoint c;
    c.kind = "hybrid";
    c.seed = seed;
    c.log_digest = log_digest;
    c.config["tabular_width"] = std::to_string(cfg.tabular_width);
    c.config["loss"] = loss_name(cfg.loss);
    c.config["learning_rate"] = fmt_double(cfg.learning_rate);
    c.config["weight_decay"] = fmt_double(cfg.weight_decay);
    c.config["epochs"] = std::to_string(cfg.epochs);
    c.config["batch_size"] = std::to_string(cfg.batch_size);
    c.config["threshold"] = fmt_double(cfg.threshold);
    c.config["with_vegetation"] = with_vegetation ? "1" : "0";
    const models::WiinConfig& w = cfg.wiin;
    c.config["wiin.input_hw"] = std::to_string(w.input_hw);
    c.config["wiin.stem"] = std::to_string(w.stem_channels);
    c.config["wiin.block1"] = std::to_string(w.block1_channels);
    c.config["wiin.block2"] = std::to_string(w.block2_channels);
    c.config["wiin.patch"] = std::to_string(w.patch);
    c.config["wiin.dim"] = std::to_string(w.dim);
    c.config["wiin.layers"] = std::to_string(w.layers);
    c.config["wiin.heads"] = std::to_string(w.heads);
    c.config["wiin.mlp_hidden"] = std::to_string(w.mlp_hidden);
    c.config["wiin.dropout"] = fmt_double(w.dropout);
    c.config["wiin.image_head_channels"] = std::to_string(w.image_head_channels);
    c.tensors = model.params("hybrid");
    append_standardizer(c, standardizer);
    save_checkpoint(path, c);
}

SavedHybrid load_hybrid(const std::string& path) {
    Checkpoint c = load_checkpoint(path);
    if (c.kind != "hybrid")
        throw IntegrityError("checkpoint " + path + " holds a '" + c.kind +
                             "' model, expected 'hybrid'");
    models::HybridConfig cfg;
    cfg.tabular_width = to_int(need(c, "tabular_width"), "tabular_width");
    cfg.loss = loss_from(need(c, "loss"));
    cfg.learning_rate = to_double(need(c, "learning_rate"), "learning_rate");
    cfg.weight_decay = to_double(need(c, "weight_decay"), "weight_decay");
    cfg.epochs = to_int(need(c, "epochs"), "epochs");
    cfg.batch_size = to_int(need(c, "batch_size"), "batch_size");
    cfg.threshold = to_double(need(c, "threshold"), "threshold");
    models::WiinConfig& w = cfg.wiin;
    w.input_hw = to_int(need(c, "wiin.input_hw"), "wiin.input_hw");
    w.stem_channels = to_int(need(c, "wiin.stem"), "wiin.stem");
    w.block1_channels = to_int(need(c, "wiin.block1"), "wiin.block1");
    w.block2_channels = to_int(need(c, "wiin.block2"), "wiin.block2");
    w.patch = to_int(need(c, "wiin.patch"), "wiin.patch");
    w.dim = to_int(need(c, "wiin.dim"), "wiin.dim");
    w.layers = to_int(need(c, "wiin.layers"), "wiin.layers");
    w.heads = to_int(need(c, "wiin.heads"), "wiin.heads");
    w.mlp_hidden = to_int(need(c, "wiin.mlp_hidden"), "wiin.mlp_hidden");
    w.dropout = to_double(need(c, "wiin.dropout"), "wiin.dropout");
    w.image_head_channels =
        to_int(need(c, "wiin.image_head_channels"), "wiin.image_head_channels");

    SavedHybrid out;
    out.model = models::HybridModel(cfg, c.seed);
    out.standardizer = restore_params(c, out.model.params("hybrid"));
    out.seed = c.seed;
    out.log_digest = c.log_digest;
    out.with_vegetation = need(c, "with_vegetation") == "1";
    return out;
}

std::string checkpoint_kind(const std::string& path) {
    return load_checkpoint(path).kind;
}

}  // namespace wildfire::io
