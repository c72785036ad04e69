#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tstcnn/core/parallel.hpp"
#include "tstcnn/dataset/pipeline.hpp"
#include "tstcnn/dataset/synthetic.hpp"
#include "tstcnn/model/checkpoint.hpp"
#include "tstcnn/training/segment.hpp"
#include "tstcnn/training/trainer.hpp"

namespace tstcnn::cli {

namespace fs = std::filesystem;

/// Flag names double as config-file keys. Listed in dump order.
inline const std::vector<std::pair<std::string, std::string>>& option_defaults() {
  static const std::vector<std::pair<std::string, std::string>> d{
      {"manifest", ""},      {"out", ""},          {"seed", "0"},        {"threads", "0"},
      {"variant", "twin"},   {"attention", "off"}, {"window", "100"},    {"stride", "10"},
      {"spatial", "120x120"}, {"filters", "30,60,80"}, {"fc-size", "500"}, {"lr", "0.01"},
      {"momentum", "0.9"},   {"batch", "8"},       {"epochs", "50"},     {"norm", "normal"},
      {"estimator", "block"}};
  return d;
}

/// key=value lines; '#' starts a comment. Unknown keys are rejected.
inline std::map<std::string, std::string> parse_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    bool known = false;
    for (const auto& [k, _] : option_defaults()) known |= k == key;
    if (!known) throw ValidationError(path.string() + ":" + std::to_string(no) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

/// Resolved option values: command-line flags over config file over defaults.
class Options {
 public:
  Options(std::map<std::string, std::string> flags, std::map<std::string, std::string> file)
      : flags_(std::move(flags)), file_(std::move(file)) {}

  bool explicitly_set(const std::string& key) const { return flags_.count(key) || file_.count(key); }

  std::string str(const std::string& key) const {
    if (auto it = flags_.find(key); it != flags_.end()) return it->second;
    if (auto it = file_.find(key); it != file_.end()) return it->second;
    for (const auto& [k, v] : option_defaults())
      if (k == key) return v;
    throw ValidationError("unknown option '" + key + "'");
  }

  std::string required(const std::string& key) const {
    const auto v = str(key);
    if (v.empty()) throw ValidationError("--" + key + " is required");
    return v;
  }

  long integer(const std::string& key, long min) const {
    const auto v = str(key);
    std::size_t used = 0;
    long x = 0;
    try {
      x = std::stol(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw ValidationError("--" + key + " expects an integer, got '" + v + "'");
    if (x < min) throw ValidationError("--" + key + " must be >= " + std::to_string(min));
    return x;
  }

  std::uint64_t seed() const {
    const auto v = str("seed");
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("--seed expects a non-negative integer, got '" + v + "'");
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw ValidationError("--seed out of range: " + v);
    }
  }

  double real(const std::string& key) const {
    const auto v = str(key);
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty() || !std::isfinite(x))
      throw ValidationError("--" + key + " expects a number, got '" + v + "'");
    return x;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const auto v = str(key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ValidationError("--" + key + " must be one of {" + list + "}, got '" + v + "'");
    }
    return v;
  }

  std::pair<std::size_t, std::size_t> spatial() const {
    const auto v = str("spatial");
    const auto x = v.find('x');
    std::size_t h = 0, w = 0;
    try {
      std::size_t u1 = 0, u2 = 0;
      if (x == std::string::npos) throw std::invalid_argument("no x");
      h = std::stoul(v.substr(0, x), &u1);
      w = std::stoul(v.substr(x + 1), &u2);
      if (u1 != x || u2 != v.size() - x - 1) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw ValidationError("--spatial expects HxW, got '" + v + "'");
    }
    if (h == 0 || w == 0) throw ValidationError("--spatial dimensions must be positive");
    return {h, w};
  }

  std::array<std::size_t, 3> filters() const {
    const auto v = str("filters");
    std::array<std::size_t, 3> f{};
    std::stringstream ss(v);
    std::string part;
    std::size_t i = 0;
    while (std::getline(ss, part, ',')) {
      if (i == 3 || part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError("--filters expects three comma-separated counts, got '" + v + "'");
      f[i++] = std::stoul(part);
    }
    if (i != 3) throw ValidationError("--filters expects three comma-separated counts, got '" + v + "'");
    return f;
  }

  /// Parses every typed option so a bad value fails before any command runs.
  void validate_all() const {
    (void)seed();
    (void)integer("threads", 0);
    (void)choice("variant", {"rgb", "flow", "twin", "late"});
    (void)choice("attention", {"on", "off"});
    (void)integer("window", 1);
    (void)integer("stride", 1);
    (void)spatial();
    (void)filters();
    (void)integer("fc-size", 1);
    (void)real("lr");
    (void)real("momentum");
    (void)integer("batch", 1);
    (void)integer("epochs", 1);
    (void)choice("norm", {"normal", "max"});
    (void)choice("estimator", {"block", "precomputed"});
  }

  std::string dump() const {
    std::ostringstream os;
    for (const auto& [k, _] : option_defaults()) os << k << '=' << str(k) << '\n';
    return os.str();
  }

 private:
  std::map<std::string, std::string> flags_, file_;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline model::ModelConfig model_config(const Options& o, std::size_t classes) {
  model::ModelConfig c;
  c.variant = model::parse_variant(o.choice("variant", {"rgb", "flow", "twin", "late"}));
  c.attention = o.choice("attention", {"on", "off"}) == "on";
  c.window_frames = std::size_t(o.integer("window", 1));
  std::tie(c.height, c.width) = o.spatial();
  c.filters = o.filters();
  c.fc_size = std::size_t(o.integer("fc-size", 1));
  c.n_classes = classes;
  c.validate();
  return c;
}

inline training::SgdConfig sgd_config(const Options& o) {
  training::SgdConfig s;
  s.learning_rate = o.real("lr");
  s.momentum = o.real("momentum");
  s.batch_size = std::size_t(o.integer("batch", 1));
  s.max_epochs = std::size_t(o.integer("epochs", 1));
  s.seed = o.seed();
  s.validate();
  return s;
}

inline training::FlowOptions flow_options(const Options& o, const dataset::Manifest* m) {
  training::FlowOptions f;
  std::string norm = o.choice("norm", {"normal", "max"});
  if (!o.explicitly_set("norm") && m && !m->flow_normalization.empty()) norm = m->flow_normalization;
  f.window.method.kind = flow::parse_normalization(norm);
  return f;
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

inline void prepare_out(const Options& o, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "resolved_config.txt", o.dump());
}

// Keeps manifest paths valid when the manifest moves to `dir`.
inline void rebase_paths(dataset::Manifest& m, const fs::path& dir) {
  auto rebase = [&](std::string& p) {
    if (p.empty()) return;
    const fs::path abs = fs::absolute(m.resolve(p));
    p = fs::proximate(abs, fs::absolute(dir)).generic_string();
  };
  for (auto& v : m.videos) rebase(v.path), rebase(v.flow_path), rebase(v.mask_path);
  m.base_dir = dir;
}

inline void print_warnings(const std::vector<std::string>& w, Io& io) {
  for (const auto& s : w) io.err << "warning: " << s << '\n';
}

inline std::vector<std::string> checkpoint_classes(const fs::path& checkpoint, std::size_t n) {
  std::ifstream in(model::sidecar_path(checkpoint));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
  }
  if (j.contains("classes") && j["classes"].size() == n) return j["classes"].get<std::vector<std::string>>();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("class" + std::to_string(i));
  return out;
}

}  // namespace detail

inline int cmd_synth(const Options& o, const std::string& spec_file, Io& io) {
  std::ifstream in(spec_file);
  if (!in) throw ValidationError("cannot open synthetic spec " + spec_file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("synthetic spec is not valid JSON: " + std::string(e.what()));
  }
  auto spec = dataset::synthetic_spec_from_json(j);
  if (o.explicitly_set("seed")) spec.seed = o.seed();
  const fs::path out = o.required("out");
  const auto ds = dataset::generate_synthetic_dataset(spec);
  detail::prepare_out(o, out);
  dataset::write_synthetic_dataset(ds, out);
  io.out << "wrote " << ds.videos.size() << " videos, " << ds.manifest.annotations.size() << " annotations to "
         << (out / "manifest.json").string() << '\n';
  return 0;
}

inline int cmd_curate(const Options& o, Io& io) {
  auto m = dataset::load_manifest(o.required("manifest"));
  const fs::path out = o.required("out");
  dataset::CurationOptions opt;
  opt.negatives.window_frames = std::size_t(o.integer("window", 1));
  opt.seed = o.seed();
  dataset::CurationReport rep;
  auto curated = dataset::curate(m, opt, &rep);
  detail::prepare_out(o, out);
  detail::rebase_paths(curated, out);
  dataset::save_manifest(out / "manifest.json", curated);
  const auto st = dataset::manifest_stats(curated);
  const auto text = dataset::format_stats_text(st);
  detail::write_text(out / "stats.txt", text);
  detail::write_text(out / "stats.csv", dataset::format_stats_csv(st));
  detail::print_warnings(rep.warnings, io);
  io.out << "annotations " << rep.annotations << ", fused segments " << rep.fused_segments << " (merged "
         << rep.merged_segments << "), dropped inconsistent " << rep.dropped_inconsistent << ", strokes "
         << rep.strokes << ", negatives " << rep.negatives << '\n'
         << text;
  return 0;
}

inline int cmd_flow(const Options& o, Io& io) {
  auto m = dataset::load_manifest(o.required("manifest"));
  const fs::path out = o.required("out");
  const std::string norm = o.choice("norm", {"normal", "max"});
  const std::string estimator = o.choice("estimator", {"block", "precomputed"});
  if (estimator == "precomputed")
    for (const auto& v : m.videos)
      if (v.flow_path.empty()) throw ValidationError("--estimator precomputed but video " + v.id + " has no flow_path");
  const training::FlowOptions fo;
  detail::prepare_out(o, out);
  fs::create_directories(out / "flow");
  for (auto& v : m.videos) {
    const Tensorf rgb = io::load_tensor(m.resolve(v.path));
    tstcnn::detail::require_shape(rgb.rank() == 4 && rgb.dim(0) == 3 && long(rgb.dim(1)) == v.frames,
                                  "video " + v.id + " does not match its manifest entry");
    const Tensorf gray = flow::to_gray(rgb);
    if (estimator == "block") {
      const auto f = flow::estimate_video_flow(gray, fo.block);
      io::save_tensor(out / "flow" / (v.id + ".flow.tt3d"), f);
      v.flow_path = fs::absolute(out / "flow" / (v.id + ".flow.tt3d")).string();
    }
    const auto masks = flow::pair_masks(flow::background_mask_baseline(gray, fo.mask_threshold));
    io::save_tensor(out / "flow" / (v.id + ".mask.tt3d"), masks);
    v.mask_path = fs::absolute(out / "flow" / (v.id + ".mask.tt3d")).string();
    io.out << v.id << ": " << (estimator == "block" ? "estimated" : "precomputed") << " flow, masks written\n";
  }
  m.flow_normalization = norm;
  detail::rebase_paths(m, out);
  dataset::save_manifest(out / "manifest.json", m);
  return 0;
}

inline int cmd_train(const Options& o, Io& io) {
  const fs::path manifest_path = o.required("manifest");
  const fs::path out = o.required("out");
  auto m = dataset::load_manifest(manifest_path);
  const auto cfg = detail::model_config(o, m.classes.size());
  const auto sgd = detail::sgd_config(o);
  const auto fo = detail::flow_options(o, &m);
  tstcnn::detail::require(!m.segments.empty(), "manifest has no curated segments; run curate first");

  training::VideoStore store(m, cfg.height, cfg.width, fo);
  auto tr = training::build_samples(m, dataset::Split::train, cfg, store, fo);
  auto va = training::build_samples(m, dataset::Split::val, cfg, store, fo);
  detail::print_warnings(tr.warnings, io);
  detail::print_warnings(va.warnings, io);
  tstcnn::detail::require(!tr.samples.empty(), "training split is empty");
  if (va.samples.empty()) io.err << "warning: validation split is empty; selecting by train accuracy\n";

  detail::prepare_out(o, out);
  model::Tstcnn<float> net(cfg);
  net.init(o.seed());
  std::ostringstream log;
  const auto state = training::train(net, tr.samples, va.samples, sgd, [&](const training::EpochRecord& r) {
    io.out << "epoch " << r.epoch << " loss " << r.train_loss << " train_acc " << r.train_acc << " val_acc "
           << r.val_acc << '\n';
  });
  detail::write_text(out / "train_log.csv", training::training_log_csv(state.history));
  const fs::path ckpt = out / "model.tt3d";
  model::save_model(ckpt, net);
  auto side = model::to_json(cfg);
  side["classes"] = m.classes;
  detail::write_text(model::sidecar_path(ckpt), side.dump(2) + "\n");
  io.out << "best epoch " << state.best_epoch << " (selection accuracy " << state.best_val_acc << "), checkpoint "
         << ckpt.string() << '\n';
  return 0;
}

inline int cmd_eval(const Options& o, const std::string& checkpoint, const std::string& split_name, Io& io) {
  const auto split = dataset::parse_split(split_name);
  auto m = dataset::load_manifest(o.required("manifest"));
  auto net = model::load_model<float>(checkpoint);
  const auto& cfg = net.config();
  tstcnn::detail::require(cfg.n_classes == m.classes.size(), "checkpoint and manifest disagree on the class count");
  const auto fo = detail::flow_options(o, &m);
  training::VideoStore store(m, cfg.height, cfg.width, fo);
  auto set = training::build_samples(m, split, cfg, store, fo);
  detail::print_warnings(set.warnings, io);
  const std::size_t batch = std::size_t(o.integer("batch", 1));
  const auto r = training::evaluate(net, set.samples, batch);
  const std::string out = o.str("out");
  if (!out.empty()) {
    detail::prepare_out(o, out);
    detail::write_text(fs::path(out) / "confusion_raw.csv", r.confusion.csv(m.classes, false));
    detail::write_text(fs::path(out) / "confusion_normalized.csv", r.confusion.csv(m.classes, true));
  } else {
    io.out << o.dump();
  }
  io.out << "split " << split_name << " windows " << set.samples.size() << " accuracy " << std::fixed
         << std::setprecision(6) << r.accuracy << '\n';
  if (cfg.variant == model::Variant::late_fusion)
    io.out << "rgb stream accuracy " << r.rgb_confusion.accuracy() << ", flow stream accuracy "
           << r.flow_confusion.accuracy() << '\n';
  return 0;
}

inline int cmd_segment(const Options& o, const std::string& checkpoint, const std::string& video, Io& io) {
  auto net = model::load_model<float>(checkpoint);
  const auto& cfg = net.config();
  training::VoteOptions vo;
  vo.window = o.explicitly_set("window") ? o.integer("window", 1) : long(cfg.window_frames);
  vo.stride = o.integer("stride", 1);
  const auto fo = detail::flow_options(o, nullptr);
  const Tensorf rgb = io::load_tensor(video);
  tstcnn::detail::require_shape(rgb.rank() == 4 && rgb.dim(0) == 3, "video must be a (3, T, H, W) tensor");
  dataset::Manifest m;
  m.videos = {{"video", fs::absolute(video).string(), long(rgb.dim(1)), "", ""}};
  training::VideoStore store(m, cfg.height, cfg.width, fo);
  const auto classes = detail::checkpoint_classes(checkpoint, cfg.n_classes);
  const auto neg = std::size_t(std::find(classes.begin(), classes.end(), dataset::kNonStroke) - classes.begin());
  const auto r = training::vote_over_windows(net, store, "video", vo, fo, neg);
  std::ostringstream csv;
  csv << "start,end,label\n";
  for (const auto& s : r.segments) csv << s.start << ',' << s.end << ",\"" << classes[s.label] << "\"\n";
  const std::string out = o.str("out");
  if (!out.empty()) {
    detail::prepare_out(o, out);
    detail::write_text(fs::path(out) / "segments.csv", csv.str());
  } else {
    io.out << o.dump();
  }
  io.out << csv.str();
  return 0;
}

/// Full command line entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Io io{out, err};
  CLI::App app{"TSTCNN stroke classification pipeline"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_path, pos1, pos2;
  struct Sub {
    const char* name;
    const char* help;
    const char* p1;
    const char* p2;
  };
  const std::vector<Sub> subs{{"synth", "generate a synthetic dataset", "spec", nullptr},
                              {"curate", "fuse, filter, extract negatives, split", nullptr, nullptr},
                              {"flow", "estimate flow and foreground masks", nullptr, nullptr},
                              {"train", "train a model", nullptr, nullptr},
                              {"eval", "accuracy and confusion matrices", "checkpoint", "split"},
                              {"segment", "vote over sliding windows of a video", "checkpoint", "video"}};
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    for (const auto& [key, _] : option_defaults()) {
      auto* opt = sc->add_option("--" + key, given[s.name][key]);
      (void)opt;
    }
    sc->add_option("--config", config_path[s.name], "key=value file, same keys as the flags");
    if (s.p1) sc->add_option(s.p1, pos1[s.name])->required();
    if (s.p2) {
      auto* p = sc->add_option(s.p2, pos2[s.name]);
      if (std::string(s.name) != "eval") p->required();
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }
  try {
    const auto* sc = app.get_subcommands().front();
    const std::string name = sc->get_name();
    std::map<std::string, std::string> flags;
    for (const auto& [key, _] : option_defaults())
      if (sc->count("--" + key)) flags[key] = given[name][key];
    std::map<std::string, std::string> file;
    if (sc->count("--config")) file = parse_config_file(config_path[name]);
    const Options o(flags, file);
    o.validate_all();
    set_num_threads(int(o.integer("threads", 0)));
    if (name == "synth") return cmd_synth(o, pos1[name], io);
    if (name == "curate") return cmd_curate(o, io);
    if (name == "flow") return cmd_flow(o, io);
    if (name == "train") return cmd_train(o, io);
    if (name == "eval") return cmd_eval(o, pos1[name], pos2[name].empty() ? "test" : pos2[name], io);
    if (name == "segment") return cmd_segment(o, pos1[name], pos2[name], io);
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace tstcnn::cli
