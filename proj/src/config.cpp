#include "glsge/config.hpp"

#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "glsge/error.hpp"
#include "glsge/kv.hpp"

namespace glsge::config {

namespace {

using kernels::Family;
using kernels::KernelSpec;

bool parse_bool(const std::string &v, const std::string &key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(ErrorKind::Config, "type_mismatch", key + ": expected true or false, got '" + v + "'");
}

int parse_int(const std::string &v, const std::string &key) {
    const long x = parse_long(v, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        fail(ErrorKind::Config, "out_of_range", key + ": value out of range");
    }
    return static_cast<int>(x);
}

std::uint64_t parse_seed(const std::string &v, const std::string &key) {
    const long x = parse_long(v, key);
    if (x < 0) fail(ErrorKind::Config, "out_of_range", key + ": seed must be >= 0");
    return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_list(const std::string &v, const std::string &key, std::size_t expected) {
    auto xs = parse_double_list(v, key);
    if (expected && xs.size() != expected) {
        fail(ErrorKind::Config, "type_mismatch",
             key + ": expected " + std::to_string(expected) + " comma-separated values, got " + std::to_string(xs.size()));
    }
    return xs;
}

std::string rect_strategy_name(label::RectStrategy s) {
    return s == label::RectStrategy::EllipseBox ? "ellipse_bbox" : "axis";
}

label::RectStrategy rect_strategy_from_name(const std::string &v) {
    if (v == "axis") return label::RectStrategy::AxisQuantile;
    if (v == "ellipse_bbox") return label::RectStrategy::EllipseBox;
    fail(ErrorKind::Config, "type_mismatch", "rect_strategy: expected axis or ellipse_bbox, got '" + v + "'");
}

std::string cond_form_name(discrepancy::CondForm f) {
    return f == discrepancy::CondForm::Squared ? "squared" : "distance";
}

discrepancy::CondForm cond_form_from_name(const std::string &v) {
    if (v == "distance") return discrepancy::CondForm::Distance;
    if (v == "squared") return discrepancy::CondForm::Squared;
    fail(ErrorKind::Config, "type_mismatch", "cond_form: expected distance or squared, got '" + v + "'");
}

std::string join(const std::vector<double> &xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + format_double(xs[i]);
    return out;
}

struct Field {
    std::function<void(Config &, const std::string &, const std::string &)> set;
    std::function<std::string(const Config &)> get;
};

void add_kernel_fields(std::vector<std::pair<std::string, Field>> &f, const std::string &prefix,
                       KernelSpec trainer::TrainerConfig::*member) {
    f.push_back({prefix, {[member](Config &c, const std::string &v, const std::string &) {
                              (c.trainer.*member).family = kernels::family_from_name(v);
                          },
                          [member](const Config &c) { return kernels::family_name((c.trainer.*member).family); }}});
    f.push_back({prefix + "_bandwidth", {[member](Config &c, const std::string &v, const std::string &k) {
                                             (c.trainer.*member).bandwidth = parse_double(v, k);
                                         },
                                         [member](const Config &c) { return format_double((c.trainer.*member).bandwidth); }}});
    f.push_back({prefix + "_degree", {[member](Config &c, const std::string &v, const std::string &k) {
                                          (c.trainer.*member).degree = parse_int(v, k);
                                      },
                                      [member](const Config &c) { return std::to_string((c.trainer.*member).degree); }}});
    f.push_back({prefix + "_offset", {[member](Config &c, const std::string &v, const std::string &k) {
                                          (c.trainer.*member).offset = parse_double(v, k);
                                      },
                                      [member](const Config &c) { return format_double((c.trainer.*member).offset); }}});
}

void add_label_fields(std::vector<std::pair<std::string, Field>> &f, const std::string &prefix,
                      label::TruncGaussParams synth::SynthConfig::*member) {
    f.push_back({prefix + "_mu", {[member](Config &c, const std::string &v, const std::string &k) {
                                      const auto xs = parse_list(v, k, 2);
                                      (c.synth.*member).mu = {xs[0], xs[1]};
                                  },
                                  [member](const Config &c) {
                                      const auto &p = c.synth.*member;
                                      return join({p.mu(0), p.mu(1)});
                                  }}});
    f.push_back({prefix + "_sigma", {[member](Config &c, const std::string &v, const std::string &k) {
                                         const auto xs = parse_list(v, k, 3);
                                         (c.synth.*member).sigma << xs[0], xs[1], xs[1], xs[2];
                                     },
                                     [member](const Config &c) {
                                         const auto &s = (c.synth.*member).sigma;
                                         return join({s(0, 0), s(0, 1), s(1, 1)});
                                     }}});
    f.push_back({prefix + "_yaw", {[member](Config &c, const std::string &v, const std::string &k) {
                                       const auto xs = parse_list(v, k, 2);
                                       (c.synth.*member).a = {xs[0], xs[1]};
                                   },
                                   [member](const Config &c) {
                                       const auto &p = c.synth.*member;
                                       return join({p.a.lo, p.a.hi});
                                   }}});
    f.push_back({prefix + "_pitch", {[member](Config &c, const std::string &v, const std::string &k) {
                                         const auto xs = parse_list(v, k, 2);
                                         (c.synth.*member).b = {xs[0], xs[1]};
                                     },
                                     [member](const Config &c) {
                                         const auto &p = c.synth.*member;
                                         return join({p.b.lo, p.b.hi});
                                     }}});
}

#define GLSGE_REAL(name, path)                                                                                        \
    f.push_back({name, {[](Config &c, const std::string &v, const std::string &k) { c.path = parse_double(v, k); }, \
                        [](const Config &c) { return format_double(c.path); }}})
#define GLSGE_INT(name, path)                                                                                      \
    f.push_back({name, {[](Config &c, const std::string &v, const std::string &k) { c.path = parse_int(v, k); }, \
                        [](const Config &c) { return std::to_string(c.path); }}})
#define GLSGE_INDEX(name, path)                                                                                     \
    f.push_back({name, {[](Config &c, const std::string &v, const std::string &k) { c.path = parse_long(v, k); }, \
                        [](const Config &c) { return std::to_string(c.path); }}})
#define GLSGE_SEED(name, path)                                                                                      \
    f.push_back({name, {[](Config &c, const std::string &v, const std::string &k) { c.path = parse_seed(v, k); }, \
                        [](const Config &c) { return std::to_string(c.path); }}})
#define GLSGE_BOOL(name, path)                                                                                      \
    f.push_back({name, {[](Config &c, const std::string &v, const std::string &k) { c.path = parse_bool(v, k); }, \
                        [](const Config &c) { return std::string(c.path ? "true" : "false"); }}})

const std::vector<std::pair<std::string, Field>> &fields() {
    static const auto table = [] {
        std::vector<std::pair<std::string, Field>> f;
        GLSGE_REAL("lambda", trainer.lambda);
        GLSGE_REAL("epsilon", trainer.epsilon);
        GLSGE_REAL("confidence", trainer.confidence);
        f.push_back({"rect_strategy",
                     {[](Config &c, const std::string &v, const std::string &) { c.trainer.rect_strategy = rect_strategy_from_name(v); },
                      [](const Config &c) { return rect_strategy_name(c.trainer.rect_strategy); }}});
        GLSGE_INT("n_outer", trainer.n_outer);
        GLSGE_INT("n_inner", trainer.n_inner);
        GLSGE_REAL("step_size", trainer.step_size);
        GLSGE_INT("batch", trainer.batch);
        GLSGE_SEED("seed", trainer.seed);
        f.push_back({"optimizer",
                     {[](Config &c, const std::string &v, const std::string &) { c.trainer.optimizer = optim::optimizer_from_name(v); },
                      [](const Config &c) { return optim::optimizer_name(c.trainer.optimizer); }}});
        add_kernel_fields(f, "kernel_z", &trainer::TrainerConfig::kz);
        add_kernel_fields(f, "kernel_y", &trainer::TrainerConfig::ky);
        f.push_back({"weight_mode",
                     {[](Config &c, const std::string &v, const std::string &) {
                          c.trainer.weight_mode = objective::weight_mode_from_name(v);
                      },
                      [](const Config &c) { return objective::weight_mode_name(c.trainer.weight_mode); }}});
        f.push_back({"cond_form",
                     {[](Config &c, const std::string &v, const std::string &) { c.trainer.cond_form = cond_form_from_name(v); },
                      [](const Config &c) { return cond_form_name(c.trainer.cond_form); }}});
        GLSGE_BOOL("freeze_pseudo", trainer.freeze_pseudo);
        GLSGE_BOOL("reweight_task", trainer.reweight_task);
        GLSGE_BOOL("reweight_cond", trainer.reweight_cond);
        GLSGE_REAL("jitter", trainer.jitter);
        f.push_back({"model",
                     {[](Config &c, const std::string &v, const std::string &) { c.trainer.model_kind = model::feature_map_from_name(v); },
                      [](const Config &c) { return model::feature_map_name(c.trainer.model_kind); }}});
        GLSGE_INDEX("hidden", trainer.hidden);
        GLSGE_INDEX("embed_dim", trainer.embed_dim);
        GLSGE_INT("pretrain_epochs", trainer.pretrain_epochs);
        GLSGE_REAL("pretrain_step", trainer.pretrain_step);
        GLSGE_INT("n_seeds", trainer.n_seeds);
        f.push_back({"sweep_lambdas",
                     {[](Config &c, const std::string &v, const std::string &k) { c.trainer.sweep_lambdas = parse_list(v, k, 0); },
                      [](const Config &c) { return join(c.trainer.sweep_lambdas); }}});
        f.push_back({"sweep_confidences",
                     {[](Config &c, const std::string &v, const std::string &k) { c.trainer.sweep_confidences = parse_list(v, k, 0); },
                      [](const Config &c) { return join(c.trainer.sweep_confidences); }}});

        GLSGE_INDEX("synth.feature_dim", synth.feature_dim);
        GLSGE_INDEX("synth.shortcut_dims", synth.shortcut_dims);
        GLSGE_INDEX("synth.n_source", synth.n_source);
        GLSGE_INDEX("synth.n_target", synth.n_target);
        GLSGE_SEED("synth.seed", synth.seed);
        GLSGE_REAL("synth.noise", synth.noise);
        GLSGE_REAL("synth.shortcut_noise", synth.shortcut_noise);
        GLSGE_REAL("synth.cond_shift", synth.cond_shift);
        add_label_fields(f, "synth.source", &synth::SynthConfig::source);
        add_label_fields(f, "synth.target", &synth::SynthConfig::target);
        return f;
    }();
    return table;
}

#undef GLSGE_REAL
#undef GLSGE_INT
#undef GLSGE_INDEX
#undef GLSGE_SEED
#undef GLSGE_BOOL

const Field &lookup(const std::string &key) {
    for (const auto &[name, field] : fields()) {
        if (name == key) return field;
    }
    fail(ErrorKind::Config, "unknown_key", "unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string> &known_keys() {
    static const auto keys = [] {
        std::vector<std::string> out;
        for (const auto &entry : fields()) out.push_back(entry.first);
        return out;
    }();
    return keys;
}

Config parse_config_text(const std::string &text, const std::vector<std::string> &overrides) {
    Config c;
    std::set<std::string> seen;
    for (const auto &kv : parse_key_values(text, ErrorKind::Config)) {
        const auto &field = lookup(kv.key);
        if (!seen.insert(kv.key).second) {
            fail(ErrorKind::Config, "duplicate_key", "line " + std::to_string(kv.line) + ": key '" + kv.key + "' repeated");
        }
        field.set(c, kv.value, kv.key);
    }
    std::set<std::string> overridden;
    for (const auto &o : overrides) {
        const auto parsed = parse_key_values(o, ErrorKind::Config);
        if (parsed.size() != 1) fail(ErrorKind::Config, "malformed_override", "override '" + o + "' is not key=value");
        const auto &kv = parsed.front();
        if (!overridden.insert(kv.key).second) {
            fail(ErrorKind::Config, "duplicate_override", "override key '" + kv.key + "' given more than once");
        }
        lookup(kv.key).set(c, kv.value, kv.key);
    }
    trainer::validate(c.trainer);
    synth::validate(c.synth);
    return c;
}

Config parse_config(const std::string &path, const std::vector<std::string> &overrides) {
    return parse_config_text(read_text_file(path), overrides);
}

std::string to_text(const Config &c) {
    std::ostringstream os;
    for (const auto &[name, field] : fields()) os << name << " = " << field.get(c) << '\n';
    return os.str();
}

}  // namespace glsge::config
