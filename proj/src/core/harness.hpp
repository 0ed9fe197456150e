#pragma once

// Training/evaluation harness: experiment configuration, multi-domain
// batching, the training step with feature alignment, leave-one-domain-out
// runs, ablation sweeps, attention export, and checkpoint glue.

#include <map>
#include <string>
#include <vector>

#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/synth.hpp"

namespace sleepdiff {

struct ExperimentConfig {
    std::vector<int> sources;
    int target = -1;
    int epochs = 50;
    int batch = 16;
    double lr = 5e-4;
    double dropout = 0.1;
    double lambda_rec = 0.5;
    double lambda_align = 0.5;
    int n_seq = 20;
    int d = 128;
    int layers = 4;
    int mdta_heads = 4;
    int seq_heads = 8;
    uint64_t seed = 0;
    bool da = true, se = true, ca = true, fa = true, id = true;

    void validate() const;
    ModelConfig model_config() const;
    std::map<std::string, std::string> to_kv() const;
    static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
};

// Plain key=value text, one pair per line, '#' comments.
ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

struct DomainPool {
    int domain_id = 0;
    std::vector<SequenceSample<float>> sequences;
};

// Equal per-domain minibatches drawn without replacement, reshuffled each
// pass. A short final batch keeps per-domain balance with >= 1 each, or is
// skipped entirely.
class BatchBuilder {
  public:
    BatchBuilder(const std::vector<DomainPool>* pools, int batch, Rng rng);

    // nullptrs when the current pass is exhausted; call start_pass to reshuffle.
    std::vector<const SequenceSample<float>*> next_batch();
    void start_pass();
    int batches_per_pass() const;

  private:
    const std::vector<DomainPool>* pools_;
    int batch_;
    int per_domain_;
    Rng rng_;
    std::vector<std::vector<int>> order_;
    std::vector<size_t> cursor_;
};

struct TrainStepResult {
    LossBundle losses;
    int correct = 0;  // training-batch epoch-level hits
    int scored = 0;
};

class Trainer {
  public:
    Trainer(const ExperimentConfig& cfg, const std::vector<DomainPool>* pools);

    TrainStepResult step(const std::vector<const SequenceSample<float>*>& batch);
    // One full pass over the pools; returns the mean loss bundle of the pass.
    LossBundle run_epoch();
    void train(std::ostream* log = nullptr);

    Model<float>& model() { return model_; }
    const ExperimentConfig& config() const { return cfg_; }
    long step_count() const { return steps_; }

  private:
    ExperimentConfig cfg_;
    const std::vector<DomainPool>* pools_;
    Model<float> model_;
    AdamOptimizer<float> opt_;
    BatchBuilder batches_;
    Rng dropout_rng_;
    long steps_ = 0;
};

MetricsReport evaluate(const Model<float>& model,
                       const std::vector<SequenceSample<float>>& target_sequences);

// Epoch-level alignment statistic (the mean-matching term) measured between
// source-domain features at evaluation time, for the alignment direction check.
double measure_epoch_alignment(const Model<float>& model, const std::vector<DomainPool>& pools,
                               int max_sequences_per_domain = 8);

void save_model(const Model<float>& model, const ExperimentConfig& cfg, const std::string& path);
struct LoadedModel {
    ExperimentConfig cfg;
    Model<float> model;
};
LoadedModel load_model(const std::string& path);

// Per-epoch DSA/DCA maps as CSV plus a JSON index and an SVG heat strip per
// layer/modality. Returns the number of DSA maps written.
int export_attention(const Model<float>& model, const SequenceSample<float>& sequence,
                     const std::string& out_dir, bool svg = true);

struct LoocvRow {
    int held_out = 0;
    double accuracy = 0, macro_f1 = 0;
};
struct LoocvSummary {
    std::vector<LoocvRow> rows;
    double avg_accuracy = 0, avg_macro_f1 = 0;
    std::string to_csv() const;
    std::string to_console() const;
};

// Trains one model per held-out domain id found in `pools`.
LoocvSummary run_loocv(const ExperimentConfig& base, const std::vector<DomainPool>& pools,
                       std::ostream* log = nullptr);

struct AblationRow {
    std::string name;
    bool da, se, ca, fa, id;
    double accuracy = 0, macro_f1 = 0;
};

// Six rows: full model, then each flag disabled in turn.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base,
                                      const std::vector<DomainPool>& pools,
                                      std::ostream* log = nullptr);

// Runs the central-difference gradient suite; returns a human-readable report
// and sets `all_passed`.
std::string run_gradient_suite(bool& all_passed);

// Loads every .slpd file in `paths` and groups sequences by domain id.
std::vector<DomainPool> load_domain_pools(const std::vector<std::string>& paths, int n_seq = 20,
                                          std::vector<std::string>* log = nullptr);

}  // namespace sleepdiff
