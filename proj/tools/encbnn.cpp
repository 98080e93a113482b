// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "encbnn/cli.hpp"

namespace {

const std::map<std::string, bool> kOnOff{{"on", true}, {"off", false}};

void add_compile_flags(CLI::App* cmd, encbnn::cli::Flags& f, std::string& report) {
  cmd->add_option("--plus-one", f.options.plus_one, "Use the +1 sparsification (on|off)")
      ->transform(CLI::CheckedTransformer(kOnOff, CLI::ignore_case));
  cmd->add_option("--comparator", f.options.comparator, "Activation circuit (reduce|sort)")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, encbnn::compiler::Comparator>{
              {"reduce", encbnn::compiler::Comparator::Reduce},
              {"sort", encbnn::compiler::Comparator::Sort}},
          CLI::ignore_case));
  cmd->add_option("--cache-shared-sums", f.options.cache_shared_sums,
                  "Compute each window sum once per layer (on|off)")
      ->transform(CLI::CheckedTransformer(kOnOff, CLI::ignore_case));
  cmd->add_option("--stride", f.options.stride, "Override every conv layer's stride")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.options.threads, "Worker threads per layer")->check(CLI::PositiveNumber);
  cmd->add_option("--t-gate", f.cost.t_gate, "Seconds per bootstrapped gate")->check(CLI::PositiveNumber);
  cmd->add_option("--intra-workers", f.cost.intra_workers, "CPUs per machine")->check(CLI::PositiveNumber);
  cmd->add_option("--machines", f.cost.machines, "Machines for the out_16p strategy")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--strategy", f.cost.strategy, "Headline strategy (out_seq|out_16p|out_full_p)")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, encbnn::costsched::Strategy>{
              {"out_seq", encbnn::costsched::Strategy::OutSeq},
              {"out_16p", encbnn::costsched::Strategy::Out16P},
              {"out_full_p", encbnn::costsched::Strategy::OutFullP}},
          CLI::ignore_case));
  cmd->add_option("--report", report, "Write the report document here");
  cmd->add_option("--seed", f.seed, "Seed echoed in the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile and evaluate binary/ternary networks as encrypted-bit circuits"};
  app.require_subcommand(1);

  encbnn::cli::Flags flags;
  std::string model, input, out_path, report;
  double fraction = 0.0;
  std::uint64_t seed = 0;

  auto* eval = app.add_subcommand("eval", "Encrypt an input, evaluate the model, decrypt the prediction");
  eval->add_option("--model", model, "Model document")->required()->check(CLI::ExistingFile);
  eval->add_option("--input", input, "Input document")->required()->check(CLI::ExistingFile);
  add_compile_flags(eval, flags, report);

  auto* estimate = app.add_subcommand("estimate", "Gate counts and runtime estimates only");
  estimate->add_option("--model", model, "Model document")->required()->check(CLI::ExistingFile);
  add_compile_flags(estimate, flags, report);

  auto* fold = app.add_subcommand("fold", "Fold batch norms into integer biases");
  fold->add_option("--model", model, "Model document")->required()->check(CLI::ExistingFile);
  fold->add_option("--out", out_path, "Output model document")->required();

  auto* tern = app.add_subcommand("ternarize", "Drop a fraction of each layer's weights");
  tern->add_option("--model", model, "Model document")->required()->check(CLI::ExistingFile);
  tern->add_option("--fraction", fraction, "Fraction of non-zero weights to drop")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  tern->add_option("--seed", seed, "Seed for random dropping");
  tern->add_option("--out", out_path, "Output model document")->required();

  auto* self = app.add_subcommand("selftest", "Exhaustive checks of gates, adders, comparators");

  CLI11_PARSE(app, argc, argv);
  if (!report.empty()) flags.report_path = report;

  if (eval->parsed()) return encbnn::cli::cmd_eval(model, input, flags, std::cout, std::cerr);
  if (estimate->parsed()) return encbnn::cli::cmd_estimate(model, flags, std::cout, std::cerr);
  if (fold->parsed()) return encbnn::cli::cmd_fold(model, out_path, std::cout, std::cerr);
  if (tern->parsed()) return encbnn::cli::cmd_ternarize(model, fraction, seed, out_path, std::cout, std::cerr);
  if (self->parsed()) return encbnn::cli::cmd_selftest(std::cout, std::cerr);
  return 1;
}
