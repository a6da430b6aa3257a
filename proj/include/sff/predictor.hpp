#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sff/field.hpp"
#include "sff/grid.hpp"
#include "sff/rng.hpp"
#include "sff/world.hpp"

namespace sff {

inline constexpr int kNeighborCount = 4;
inline constexpr int kBevSide = 32;
inline constexpr int kFeatureDim = 3 + kNeighborCount * 5 + kBevSide * kBevSide;
inline constexpr int kActionPairs = 9;
inline constexpr int kActionDim = 2 * kActionPairs;

struct FeatureConfig {
    double pos_norm = 50.0;   // m, relative-position scale
    double speed_norm = 20.0; // m/s
    double bev_cell = 1.0;    // m per raster cell
};

using FeatureVector = std::vector<double>; // size kFeatureDim, entries in [-1, 1]

// Body-frame acceleration pair: ax longitudinal, ay lateral.
struct ActionPair {
    double ax = 0.0;
    double ay = 0.0;
};
using ActionSet = std::vector<ActionPair>; // size kActionPairs, lexicographic

void sort_canonical(ActionSet& actions);

// Target state, nearest-neighbor relative states, and a body-frame
// drivable-area raster, in that order.
FeatureVector featurize(const WorldState& world, ActorId target, const DrivableMap& drivable,
                        const FeatureConfig& cfg = {});

// Ground-truth label: each safety-procedure policy as the equivalent
// body-frame acceleration pair at the current speed.
ActionSet oracle_action_set(const ActorState& state, const VehicleShape& shape,
                            const SafetyProcedure& proc);

// Inverse of the oracle mapping; arbitrary (e.g. predicted) pairs become the
// nearest representable braking policy.
PolicyParams action_to_policy(const ActionPair& a, double speed, const VehicleShape& shape,
                              const ControlLimits& limits = {});

// Rolls out every action as a braking policy and stamps the footprints,
// clipped to the window (predicted actions may brake weakly and run long).
ClaimedSetGrid action_claimed_set(const ActionSet& actions, const ActorState& state,
                                  const VehicleShape& shape, const SafetyProcedure& proc,
                                  const GridSpec& spec);

// --- network ---------------------------------------------------------------

struct Layer {
    int in = 0, out = 0;
    std::vector<double> w; // out x in, row-major
    std::vector<double> b;
};

struct PredictorModel {
    std::vector<int> dims{kFeatureDim, 64, 64, kActionDim};
    std::vector<Layer> layers;
    double a_max_abs = 8.0; // output = a_max_abs * tanh(z), bounded by construction

    std::vector<double> forward(const std::vector<double>& x) const;
    ActionSet predict(const FeatureVector& f) const;

    static PredictorModel init(const std::vector<int>& dims, double a_max_abs, Rng& rng);
    void save(const std::string& path) const;
    static PredictorModel load(const std::string& path);
    std::size_t parameter_count() const;
};

ClaimedSetGrid predict_claimed_set(const PredictorModel& model, const WorldState& world,
                                   ActorId target, const GridSpec& spec,
                                   const DrivableMap& drivable, const SafetyProcedure& proc);

// --- dataset ----------------------------------------------------------------

struct Example {
    FeatureVector features;      // kFeatureDim
    std::vector<double> actions; // kActionDim, canonical order
    double speed = 0.0;          // with the shape, enough to rebuild grids
    VehicleShape shape;
};

struct Dataset {
    std::vector<Example> examples;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> train_idx, val_idx;

    // ceil(0.9 n) train / remainder validation, shuffled by the dataset seed.
    void split();
    void save(const std::string& path) const;
    static Dataset load(const std::string& path);
};

// --- training ---------------------------------------------------------------

struct TrainHyper {
    int batch = 64;
    double lr = 1e-3;
    double momentum = 0.9;
    int epochs = 50;
    std::uint64_t init_seed = 1;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double best_val = 0.0;
    double baseline_val = 0.0; // constant-mean-predictor MSE on the validation split

    void to_csv(const std::string& path) const; // columns: epoch, train_loss, val_loss
};

// Mini-batch gradient descent with momentum; returns the best-validation
// model. Throws TrainingError naming the epoch if the loss turns non-finite.
PredictorModel train(const Dataset& data, const TrainHyper& hyper, TrainLog* log = nullptr);

// Mean squared error over all outputs of all rows.
double batch_loss(const PredictorModel& m, const std::vector<const Example*>& rows);

struct Gradients {
    std::vector<std::vector<double>> w, b; // per layer, matching shapes
};
Gradients batch_gradients(const PredictorModel& m, const std::vector<const Example*>& rows,
                          double* loss_out = nullptr);

// --- evaluation ---------------------------------------------------------------

struct IouMetrics {
    double mean = 0.0;
    double p10 = 0.0; // 10th percentile
    std::vector<double> per_example;
};

// Claimed-set IoU of predicted vs label actions, reconstructed from a
// canonical pose (origin, heading 0) at each example's recorded speed.
// Empty-vs-empty counts as 1.
IouMetrics evaluate_iou(const PredictorModel& model, const Dataset& data,
                        const SafetyProcedure& proc, bool validation_only = true);

double grid_iou(const ClaimedSetGrid& a, const ClaimedSetGrid& b);

}  // namespace sff
