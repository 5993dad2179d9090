#pragma once

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dupscope/analytics.hpp"
#include "dupscope/augment.hpp"
#include "dupscope/cnn.hpp"
#include "dupscope/error.hpp"
#include "dupscope/ingest.hpp"
#include "dupscope/parallel.hpp"
#include "dupscope/retrieval.hpp"
#include "dupscope/service.hpp"

namespace dupscope::cli {

// Exit codes for `compare`; every other subcommand uses 0 on success and kExitError on failure.
inline constexpr int kExitSimilar = 0;
inline constexpr int kExitDissimilar = 1;
inline constexpr int kExitError = 2;

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_csv(s)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(Errc::InvalidArgument, "not a number: '" + item + "'");
    }
  }
  return out;
}

inline Method make_method(const std::string& name, std::optional<double> threshold, const std::string& checkpoint) {
  Method m = Method::make(parse_method(name), threshold, checkpoint);
  m.validate();
  return m;
}

/// Parses argv and runs one subcommand. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"dupscope: near-duplicate image retrieval and spread analysis"};
  app.require_subcommand(1);
  std::string data_root = "data";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool json = false;
  app.add_option("--data-root", data_root, "Data root for the service and relative corpora");
  app.add_option("--seed", seed, "Seed for every randomized stage");
  app.add_option("--threads", threads, "Worker threads (0 = all cores, 1 = deterministic)");
  app.add_flag("--json", json, "Machine-readable output");

  std::string method = "improved-orb", checkpoint;
  std::optional<double> threshold;
  const auto method_opts = [&](CLI::App* sub) {
    sub->add_option("--method", method, "histogram|daisy|orb|improved-orb|cnn");
    sub->add_option("--threshold", threshold, "Decision threshold (default per method)");
    sub->add_option("--checkpoint", checkpoint, "CNN checkpoint (cnn method)");
  };

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a corpus from a feed source");
  std::string source, keywords, corpus_out;
  std::size_t max_posts = 1000;
  ingest_cmd->add_option("--source", source, "Feed URL or NDJSON file")->required();
  ingest_cmd->add_option("--keywords", keywords, "Comma-separated keywords")->required();
  ingest_cmd->add_option("--out", corpus_out, "Corpus directory")->required();
  ingest_cmd->add_option("--max-posts", max_posts, "Maximum matching posts");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Compare two images");
  std::string img_a, img_b;
  method_opts(compare_cmd);
  compare_cmd->add_option("--a", img_a, "First image")->required();
  compare_cmd->add_option("--b", img_b, "Second image")->required();

  // search
  auto* search_cmd = app.add_subcommand("search", "Retrieve near-duplicates of a query from a corpus");
  std::string query, corpus_dir, results_out;
  method_opts(search_cmd);
  search_cmd->add_option("--query", query, "Query image")->required();
  search_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  search_cmd->add_option("--out", results_out, "results.json path")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy on an annotated set");
  std::string set_path;
  method_opts(eval_cmd);
  eval_cmd->add_option("--set", set_path, "Annotated set CSV")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy curves over a threshold range");
  std::string sets, thresholds = "0.1..0.9:0.1", curve_out, variance_points;
  method_opts(sweep_cmd);
  sweep_cmd->add_option("--sets", sets, "Comma-separated annotated set CSVs")->required();
  sweep_cmd->add_option("--thresholds", thresholds, "t1..t2:step");
  sweep_cmd->add_option("--out", curve_out, "curve.csv path")->required();
  sweep_cmd->add_option("--variance-at", variance_points, "Comma-separated thresholds for average variance");

  // augment
  auto* augment_cmd = app.add_subcommand("augment", "Generate labelled modification pairs");
  std::string aug_in, aug_out;
  int pairs_per_image = 1;
  augment_cmd->add_option("--in", aug_in, "Source image directory")->required();
  augment_cmd->add_option("--out", aug_out, "Output directory")->required();
  augment_cmd->add_option("--pairs-per-image", pairs_per_image, "Similar/dissimilar pairs per source")->required();
  augment_cmd->add_option("--seed", seed, "Seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the CNN on a pair manifest");
  std::string manifest, model_out;
  cnn::TrainConfig tcfg;
  std::uint32_t input_size = 128;
  train_cmd->add_option("--manifest", manifest, "manifest.jsonl from augment")->required();
  train_cmd->add_option("--epochs", tcfg.epochs, "Epochs");
  train_cmd->add_option("--out", model_out, "Checkpoint path")->required();
  train_cmd->add_option("--batch-size", tcfg.batch_size, "Mini-batch size");
  train_cmd->add_option("--lr", tcfg.learning_rate, "Adam learning rate");
  train_cmd->add_option("--input-size", input_size, "Network input side length");
  train_cmd->add_option("--checkpoint-every", tcfg.checkpoint_every, "Checkpoint every N epochs");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP job service");
  std::string bind = "127.0.0.1:8080";
  service::ServiceConfig scfg;
  serve_cmd->add_option("--bind", bind, "host:port");
  serve_cmd->add_option("--workers", scfg.workers, "Job worker count");
  serve_cmd->add_option("--source", scfg.default_source, "Default feed source");
  serve_cmd->add_option("--method", method, "Default method");
  serve_cmd->add_option("--threshold", threshold, "Default threshold");
  serve_cmd->add_option("--checkpoint", scfg.checkpoint, "CNN checkpoint enabling the cnn method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitError;
  }

  set_default_threads(threads);
  const auto report_error = [&](const std::string& code, const std::string& what) {
    if (json)
      out << nlohmann::json{{"error", code}, {"message", what}}.dump() << '\n';
    else
      err << "error: " << what << '\n';
    return kExitError;
  };

  try {
    if (*ingest_cmd) {
      IngestOptions opt;
      opt.source = source;
      opt.keywords = split_csv(keywords);
      opt.max_posts = max_posts;
      opt.parallelism = threads;
      IngestReport rep;
      const Corpus c = ingest(opt, corpus_out, &rep);
      if (json) {
        out << nlohmann::json{{"corpus_id", c.corpus_id},
                              {"corpus", corpus_out},
                              {"records", rep.fetch.records},
                              {"malformed", rep.fetch.malformed},
                              {"matched_posts", rep.matched_posts},
                              {"image_posts", rep.image_posts},
                              {"images", c.images.size()},
                              {"failures", c.failures.size()}}
                   .dump()
            << '\n';
      } else {
        out << "corpus " << c.corpus_id << " at " << corpus_out << ": " << rep.matched_posts << " matching posts, "
            << rep.image_posts << " with images, " << c.images.size() << " distinct images, " << c.failures.size()
            << " failed downloads";
        if (rep.fetch.malformed) out << ", " << rep.fetch.malformed << " malformed records skipped";
        out << '\n';
      }
      return 0;
    }

    if (*compare_cmd) {
      const Method m = make_method(method, threshold, checkpoint);
      const RasterImage a = load_image(img_a), b = load_image(img_b);
      const TimedVerdict tv = timed_compare(m, a, b);
      if (json) {
        auto j = verdict_json(tv.verdict);
        j["elapsed_seconds"] = tv.seconds;
        out << j.dump() << '\n';
      } else {
        out << std::setprecision(6) << "method=" << method_name(tv.verdict.method) << " score=" << tv.verdict.score
            << " threshold=" << tv.verdict.threshold << " verdict=" << (tv.verdict.similar ? "similar" : "dissimilar")
            << (tv.verdict.degenerate ? " (degenerate)" : "") << " elapsed=" << tv.seconds << "s\n";
      }
      return tv.verdict.similar ? kExitSimilar : kExitDissimilar;
    }

    if (*search_cmd) {
      const Method m = make_method(method, threshold, checkpoint);
      const ResultSet r = search(m, query, corpus_dir);
      const auto j = to_json(r);
      detail::atomic_write(results_out, j.dump(2));
      if (json)
        out << j.dump() << '\n';
      else
        out << "retrieved " << r.retrieved() << " of " << r.corpus_size << " images (" << r.skipped << " skipped), reduction "
            << std::fixed << std::setprecision(1) << reduction_pct(r) << "%, " << std::setprecision(3)
            << r.mean_seconds_per_pair << "s/pair; wrote " << results_out << '\n';
      return 0;
    }

    if (*eval_cmd) {
      const Method m = make_method(method, threshold, checkpoint);
      const AnnotatedSet set = read_annotated_set(set_path);
      const double acc = evaluate_accuracy(m, set);
      if (json)
        out << nlohmann::json{{"set", set.name}, {"method", m.name()}, {"threshold", m.threshold}, {"accuracy", acc}}.dump()
            << '\n';
      else
        out << set.name << ": accuracy " << std::fixed << std::setprecision(2) << acc * 100.0 << "% at threshold "
            << std::defaultfloat << m.threshold << '\n';
      return 0;
    }

    if (*sweep_cmd) {
      const Method m = make_method(method, threshold, checkpoint);
      const auto ts = parse_threshold_range(thresholds);
      std::vector<Curve> curves;
      for (const auto& s : split_csv(sets)) curves.push_back(threshold_sweep(m, read_annotated_set(s), ts));
      const std::string csv = curves_csv(curves);
      detail::atomic_write(curve_out, csv);
      std::optional<double> variance;
      if (!variance_points.empty()) variance = variance_at(curves, parse_doubles(variance_points));
      if (json) {
        nlohmann::json j{{"method", m.name()}, {"curve", curve_out}, {"sets", curves.size()}, {"thresholds", ts}};
        j["average_variance"] = variance ? nlohmann::json(*variance) : nlohmann::json(nullptr);
        out << j.dump() << '\n';
      } else {
        out << "wrote " << curves.size() << " curves x " << ts.size() << " thresholds to " << curve_out << '\n';
        if (variance) out << "average variance " << std::fixed << std::setprecision(4) << *variance << '\n';
      }
      return 0;
    }

    if (*augment_cmd) {
      const Manifest man = generate_pairs(aug_in, aug_out, pairs_per_image, seed);
      const auto path = std::filesystem::path(aug_out) / "manifest.jsonl";
      write_manifest(man, path);
      if (json)
        out << nlohmann::json{{"manifest", path.string()}, {"pairs", man.pairs.size()}, {"skipped", man.skipped.size()}}.dump()
            << '\n';
      else
        out << "wrote " << man.pairs.size() << " pairs to " << path.string() << " (" << man.skipped.size()
            << " sources skipped)\n";
      return 0;
    }

    if (*train_cmd) {
      const Manifest man = read_manifest(manifest);
      cnn::ModelConfig mc;
      mc.input_size = input_size;
      mc.validate();
      cnn::Model model(mc, seed);
      tcfg.rng_seed = seed;
      if (tcfg.checkpoint_every > 0) tcfg.checkpoint_path = model_out;
      const auto result = cnn::train(model, man.pairs, tcfg);
      cnn::save_checkpoint(model_out, model, result.history.empty() ? cnn::History{} : result.history);
      std::ostringstream hist;
      hist << "epoch,loss,accuracy\n" << std::setprecision(10);
      for (const auto& e : result.history) hist << e.epoch << ',' << e.loss << ',' << e.accuracy << '\n';
      const std::string hist_path = model_out + ".history.csv";
      detail::atomic_write(hist_path, hist.str());
      const auto& last = result.history.back();
      if (json)
        out << nlohmann::json{{"checkpoint", model_out},
                              {"history", hist_path},
                              {"epochs", result.history.size()},
                              {"loss", last.loss},
                              {"accuracy", last.accuracy},
                              {"skipped", result.skipped}}
                   .dump()
            << '\n';
      else
        out << "trained " << result.history.size() << " epochs: loss " << last.loss << ", accuracy " << last.accuracy * 100.0
            << "%; wrote " << model_out << " and " << hist_path << '\n';
      return 0;
    }

    if (*serve_cmd) {
      const auto colon = bind.rfind(':');
      require(colon != std::string::npos, Errc::InvalidArgument, "--bind must be host:port");
      scfg.host = bind.substr(0, colon);
      try {
        scfg.port = std::stoi(bind.substr(colon + 1));
      } catch (const std::exception&) {
        fail(Errc::InvalidArgument, "bad port in --bind " + bind);
      }
      scfg.data_root = data_root;
      scfg.default_method = parse_method(method);
      scfg.default_threshold = threshold;
      service::Service svc(scfg);
      const int port = svc.start();
      out << "listening on " << scfg.host << ":" << port << std::endl;
      static std::atomic<bool> stop_requested{false};
      std::signal(SIGINT, [](int) { stop_requested = true; });
      std::signal(SIGTERM, [](int) { stop_requested = true; });
      while (!stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      svc.stop();
      return 0;
    }
  } catch (const Error& e) {
    return report_error(std::string(errc_name(e.code())), e.what());
  } catch (const std::exception& e) {
    return report_error("Unexpected", e.what());
  }
  return kExitError;
}

}  // namespace dupscope::cli
