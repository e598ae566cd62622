// Copyright 2026 The Panoptic Core Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "panoptic/evaluation.hpp"
#include "panoptic/fixtures.hpp"
#include "panoptic/fusion.hpp"
#include "panoptic/loss_oracle.hpp"
#include "panoptic/metrics.hpp"
#include "panoptic/panoptic_model.hpp"
#include "panoptic/png_codec.hpp"

namespace panoptic::cli {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string gt_dir;
  std::string pred_dir;
  std::string gt_json;
  std::string pred_json;
  std::string categories;
  std::string out;
  int jobs = 1;
  std::string format = "json";
  bool no_fn_void_rule = false;

  std::string detections;
  std::string semantic;
  FusionConfig fusion;

  std::string fixture;
};

// Input-set problems: missing files, unpaired images, empty inputs.
class InputSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out, std::ios::trunc);
  if (!file) throw InputSetError("cannot write " + cfg.out);
  file << text;
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw InputSetError(std::string(flag) + " is required");
  if (!fs::exists(path)) {
    throw InputSetError(std::string(flag) + " path does not exist: " + path);
  }
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.categories, "--categories");
  require_file(cfg.gt_dir, "--gt-dir");
  require_file(cfg.pred_dir, "--pred-dir");
  if (cfg.jobs < 1) throw InputSetError("--jobs must be at least 1");
  const ClassTable classes = load_class_table(cfg.categories);

  auto optional_path = [](const std::string& p) -> std::optional<std::string> {
    if (p.empty()) return std::nullopt;
    return p;
  };
  const DatasetListing listing =
      list_dataset(cfg.gt_dir, cfg.pred_dir, optional_path(cfg.gt_json),
                   optional_path(cfg.pred_json));
  if (!listing.unmatched.empty()) {
    std::ostringstream os;
    os << "unmatched images:";
    for (const auto& stem : listing.unmatched) os << " " << stem;
    throw InputSetError(os.str());
  }
  if (listing.pairs.empty()) throw InputSetError("no images");

  MetricOptions options;
  options.fn_void_rule = !cfg.no_fn_void_rule;
  std::size_t done = 0;
  const std::size_t total = listing.pairs.size();
  const MetricAccumulator acc = evaluate_dataset(
      listing.pairs, classes, options, cfg.jobs, [&](std::size_t) {
        ++done;
        if (done == total || done % 100 == 0) {
          err << "evaluated " << done << "/" << total << " images\n";
        }
      });
  const MetricReport report = finalize(acc, classes);
  emit(cfg, cfg.format == "text" ? report.to_text()
                                 : report.to_json().dump(2) + "\n",
       out);
  return kExitOk;
}

int cmd_fuse(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.categories, "--categories");
  require_file(cfg.detections, "--detections");
  require_file(cfg.semantic, "--semantic");
  if (cfg.out.empty()) throw InputSetError("--out is required for fuse");
  const ClassTable classes = load_class_table(cfg.categories);
  const auto detections = detections_from_json(read_json_file(cfg.detections));
  const SemanticMap semantic =
      read_semantic(read_file_bytes(cfg.semantic), classes);

  const FusionResult result = fuse(detections, semantic, classes, cfg.fusion);
  for (std::size_t index : result.empty_masks) {
    err << "warning: detection " << index
        << " has an empty pasted mask and was discarded\n";
  }
  const EncodedPanoptic encoded = write_panoptic(result.panoptic);
  write_file_bytes(cfg.out, encoded.png);
  const fs::path sidecar_path = fs::path(cfg.out).replace_extension(".json");
  std::ofstream sidecar(sidecar_path, std::ios::trunc);
  if (!sidecar) throw InputSetError("cannot write " + sidecar_path.string());
  sidecar << encoded.sidecar.dump(2) << "\n";

  nlohmann::json summary = {{"png", cfg.out},
                            {"sidecar", sidecar_path.string()},
                            {"segments", result.panoptic.segments().size()},
                            {"accepted_detections", result.accepted},
                            {"empty_mask_detections", result.empty_masks}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_losses(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_file(cfg.fixture, "--fixture");
  const LossReport report = evaluate_loss_fixture(read_json_file(cfg.fixture));
  for (const auto& flag : report.flags) err << "note: " << flag << "\n";
  if (cfg.format == "text") {
    std::ostringstream os;
    const nlohmann::json doc = report.to_json();
    for (const char* key : {"l_ss", "l_rpn_ob", "l_rpn_bb", "l_rsh_cls",
                            "l_rsh_bb", "l_rsh_msk"}) {
      os << key << " " << (doc[key].is_null() ? "inf" : doc[key].dump())
         << "\n";
    }
    emit(cfg, os.str(), out);
  } else {
    emit(cfg, report.to_json().dump(2) + "\n", out);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Panoptic evaluation, fusion and loss oracles"};
  app.require_subcommand(1);

  auto* evaluate = app.add_subcommand(
      "evaluate", "Compute PQ, PQ_St, PQ_Th and PQ-dagger over a dataset");
  evaluate->add_option("--gt-dir", cfg.gt_dir, "Ground-truth PNG directory")
      ->required();
  evaluate->add_option("--pred-dir", cfg.pred_dir, "Prediction PNG directory")
      ->required();
  evaluate->add_option("--gt-json", cfg.gt_json,
                       "Combined ground-truth annotation file");
  evaluate->add_option("--pred-json", cfg.pred_json,
                       "Combined prediction annotation file");
  evaluate->add_option("--categories", cfg.categories, "Categories JSON")
      ->required();
  evaluate->add_option("--out", cfg.out, "Report path (default: stdout)");
  evaluate->add_option("--jobs", cfg.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--format", cfg.format)
      ->check(CLI::IsMember({"json", "text"}));
  evaluate->add_flag("--no-fn-void-rule", cfg.no_fn_void_rule,
                     "Count GT segments covered by predicted void as FN");

  auto* fuse_cmd = app.add_subcommand(
      "fuse", "Fuse instance detections with a semantic map");
  fuse_cmd->add_option("--detections", cfg.detections, "Detections JSON")
      ->required();
  fuse_cmd->add_option("--semantic", cfg.semantic, "Semantic label PNG")
      ->required();
  fuse_cmd->add_option("--categories", cfg.categories, "Categories JSON")
      ->required();
  fuse_cmd->add_option("--out", cfg.out, "Output panoptic PNG")->required();
  fuse_cmd->add_option("--coverage-threshold", cfg.fusion.coverage_threshold);
  fuse_cmd->add_option("--stuff-min-area", cfg.fusion.stuff_min_area);
  fuse_cmd->add_option("--mask-threshold", cfg.fusion.mask_threshold);
  fuse_cmd->add_option("--format", cfg.format)
      ->check(CLI::IsMember({"json", "text"}));

  auto* losses = app.add_subcommand(
      "losses", "Evaluate the training losses on a JSON fixture bundle");
  losses->add_option("--fixture", cfg.fixture, "Loss fixture JSON")->required();
  losses->add_option("--out", cfg.out, "Report path (default: stdout)");
  losses->add_option("--format", cfg.format)
      ->check(CLI::IsMember({"json", "text"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputSet;
  }

  try {
    if (*evaluate) return cmd_evaluate(cfg, out, err);
    if (*fuse_cmd) return cmd_fuse(cfg, out, err);
    return cmd_losses(cfg, out, err);
  } catch (const InputSetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputSet;
  } catch (const DecodeError& e) {
    err << "decode error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const nlohmann::json::exception& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitDecode;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDecode;
  }
}

}  // namespace panoptic::cli
