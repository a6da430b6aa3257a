#include "sff/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sff/errors.hpp"

namespace sff {

void sort_canonical(ActionSet& actions) {
    std::sort(actions.begin(), actions.end(), [](const ActionPair& a, const ActionPair& b) {
        return a.ax != b.ax ? a.ax < b.ax : a.ay < b.ay;
    });
}

namespace {

double unit_clamp(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

FeatureVector featurize(const WorldState& world, ActorId target, const DrivableMap& drivable,
                        const FeatureConfig& cfg) {
    const Actor& t = world.actor(target);
    FeatureVector f;
    f.reserve(kFeatureDim);
    f.push_back(unit_clamp(t.state.speed / cfg.speed_norm));
    f.push_back(std::sin(t.state.heading));
    f.push_back(std::cos(t.state.heading));

    // nearest other vehicles, distance then id for determinism
    std::vector<const Actor*> others;
    for (const Actor& a : world.actors)
        if (a.state.id != target) others.push_back(&a);
    std::sort(others.begin(), others.end(), [&](const Actor* a, const Actor* b) {
        const double da = (a->state.position - t.state.position).norm2();
        const double db = (b->state.position - t.state.position).norm2();
        return da != db ? da < db : a->state.id < b->state.id;
    });
    for (int k = 0; k < kNeighborCount; ++k) {
        if (k < static_cast<int>(others.size())) {
            const ActorState& o = others[static_cast<std::size_t>(k)]->state;
            const Vec2 rel = (o.position - t.state.position).rotated(-t.state.heading);
            const double dh = normalize_angle(o.heading - t.state.heading);
            f.push_back(unit_clamp(rel.x / cfg.pos_norm));
            f.push_back(unit_clamp(rel.y / cfg.pos_norm));
            f.push_back(std::sin(dh));
            f.push_back(std::cos(dh));
            f.push_back(unit_clamp(o.speed / cfg.speed_norm));
        } else {
            for (int i = 0; i < 5; ++i) f.push_back(0.0);
        }
    }

    // body-frame drivable raster, row-major from the rear-left corner
    const double half = kBevSide / 2.0;
    for (int j = 0; j < kBevSide; ++j)
        for (int i = 0; i < kBevSide; ++i) {
            const Vec2 body{(i + 0.5 - half) * cfg.bev_cell, (j + 0.5 - half) * cfg.bev_cell};
            const Vec2 p = t.state.position + body.rotated(t.state.heading);
            f.push_back(drivable.drivable(p) ? 1.0 : 0.0);
        }
    return f;
}

ActionSet oracle_action_set(const ActorState& state, const VehicleShape& shape,
                            const SafetyProcedure& proc) {
    if (proc.policies.size() != kActionPairs)
        throw ValidationError("action set requires a " + std::to_string(kActionPairs) +
                              "-policy procedure family");
    shape.validate();
    ActionSet actions;
    actions.reserve(kActionPairs);
    for (const PolicyParams& p : proc.policies) {
        const double ay =
            state.speed * state.speed * std::tan(p.steer_hold) / shape.wheelbase;
        actions.push_back({-p.decel, ay});
    }
    sort_canonical(actions);
    return actions;
}

PolicyParams action_to_policy(const ActionPair& a, double speed, const VehicleShape& shape,
                              const ControlLimits& limits) {
    PolicyParams p;
    p.decel = std::clamp(std::max(0.0, -a.ax), 0.0, limits.accel_abs_max);
    p.steer_hold = speed > 0.0
                       ? std::clamp(std::atan(a.ay * shape.wheelbase / (speed * speed)),
                                    -limits.steer_max, limits.steer_max)
                       : 0.0;
    return p;
}

ClaimedSetGrid action_claimed_set(const ActionSet& actions, const ActorState& state,
                                  const VehicleShape& shape, const SafetyProcedure& proc,
                                  const GridSpec& spec) {
    std::vector<Trajectory> rollouts;
    rollouts.reserve(actions.size());
    for (const ActionPair& a : actions)
        rollouts.push_back(
            rollout(state, shape, action_to_policy(a, state.speed, shape), proc.horizon, proc.dt));
    return stamp_trajectories(rollouts, shape, spec, true);
}

ClaimedSetGrid predict_claimed_set(const PredictorModel& model, const WorldState& world,
                                   ActorId target, const GridSpec& spec,
                                   const DrivableMap& drivable, const SafetyProcedure& proc) {
    const Actor& t = world.actor(target);
    const ActionSet actions = model.predict(featurize(world, target, drivable));
    return action_claimed_set(actions, t.state, t.shape, proc, spec);
}

// --- network ---------------------------------------------------------------

std::vector<double> PredictorModel::forward(const std::vector<double>& x) const {
    if (layers.empty()) throw ValidationError("model has no layers");
    if (static_cast<int>(x.size()) != layers.front().in)
        throw ValidationError("feature dimension mismatch");
    std::vector<double> a = x, z;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& L = layers[l];
        z.assign(static_cast<std::size_t>(L.out), 0.0);
        for (int o = 0; o < L.out; ++o) {
            const double* row = L.w.data() + static_cast<std::size_t>(o) * L.in;
            double acc = L.b[static_cast<std::size_t>(o)];
            for (int i = 0; i < L.in; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(o)] = acc;
        }
        const bool last = l + 1 == layers.size();
        for (double& v : z) v = std::tanh(v) * (last ? a_max_abs : 1.0);
        a.swap(z);
    }
    return a;
}

ActionSet PredictorModel::predict(const FeatureVector& f) const {
    const std::vector<double> out = forward(f);
    ActionSet actions;
    actions.reserve(out.size() / 2);
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) actions.push_back({out[i], out[i + 1]});
    sort_canonical(actions);
    return actions;
}

PredictorModel PredictorModel::init(const std::vector<int>& dims, double a_max_abs, Rng& rng) {
    if (dims.size() < 2) throw ValidationError("model needs at least input and output layers");
    PredictorModel m;
    m.dims = dims;
    m.a_max_abs = a_max_abs;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer L;
        L.in = dims[l];
        L.out = dims[l + 1];
        if (L.in <= 0 || L.out <= 0) throw ValidationError("layer dimensions must be positive");
        const double r = std::sqrt(6.0 / (L.in + L.out));
        L.w.resize(static_cast<std::size_t>(L.in) * L.out);
        for (double& w : L.w) w = rng.uniform(-r, r);
        L.b.assign(static_cast<std::size_t>(L.out), 0.0);
        m.layers.push_back(std::move(L));
    }
    return m;
}

std::size_t PredictorModel::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& L : layers) n += L.w.size() + L.b.size();
    return n;
}

void PredictorModel::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = "sff-predictor-1";
    j["dims"] = dims;
    j["a_max_abs"] = a_max_abs;
    j["activation"] = "tanh";
    j["layers"] = nlohmann::json::array();
    for (const Layer& L : layers)
        j["layers"].push_back({{"in", L.in}, {"out", L.out}, {"w", L.w}, {"b", L.b}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump();
    out << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

PredictorModel PredictorModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    PredictorModel m;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        if (j.value("format", "") != std::string("sff-predictor-1"))
            throw ValidationError("'" + path + "' is not a predictor checkpoint");
        m.dims = j.at("dims").get<std::vector<int>>();
        m.a_max_abs = j.at("a_max_abs").get<double>();
        for (const auto& lj : j.at("layers")) {
            Layer L;
            L.in = lj.at("in").get<int>();
            L.out = lj.at("out").get<int>();
            L.w = lj.at("w").get<std::vector<double>>();
            L.b = lj.at("b").get<std::vector<double>>();
            if (L.w.size() != static_cast<std::size_t>(L.in) * L.out ||
                L.b.size() != static_cast<std::size_t>(L.out))
                throw ValidationError("checkpoint layer shapes are inconsistent");
            m.layers.push_back(std::move(L));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what());
    }
    if (m.layers.empty()) throw ValidationError("checkpoint has no layers");
    return m;
}

// --- dataset ----------------------------------------------------------------

namespace {

void make_split(std::size_t n, std::uint64_t seed, std::vector<std::uint32_t>& train,
                std::vector<std::uint32_t>& val) {
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    Rng rng = Rng(seed).derive("split");
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
        const std::size_t j = rng.uniform_index(i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t ntrain = (9 * n + 9) / 10;  // ceil(0.9 n)
    train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(ntrain, n)));
    val.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(ntrain, n)), order.end());
}

constexpr char kDatasetMagic[8] = {'S', 'F', 'F', 'D', 'S', 'E', 'T', '1'};

}  // namespace

void Dataset::split() { make_split(examples.size(), seed, train_idx, val_idx); }

void Dataset::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(kDatasetMagic, sizeof kDatasetMagic);
    const std::uint32_t count = static_cast<std::uint32_t>(examples.size());
    const std::uint32_t fdim = kFeatureDim, adim = kActionDim;
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(&fdim), sizeof fdim);
    out.write(reinterpret_cast<const char*>(&adim), sizeof adim);
    out.write(reinterpret_cast<const char*>(&seed), sizeof seed);
    for (const Example& e : examples) {
        if (e.features.size() != kFeatureDim || e.actions.size() != kActionDim)
            throw ValidationError("example dimensions disagree with the dataset format");
        const double dims[4] = {e.speed, e.shape.length, e.shape.width, e.shape.wheelbase};
        out.write(reinterpret_cast<const char*>(dims), sizeof dims);
        out.write(reinterpret_cast<const char*>(e.features.data()),
                  static_cast<std::streamsize>(e.features.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(e.actions.data()),
                  static_cast<std::streamsize>(e.actions.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

Dataset Dataset::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kDatasetMagic, sizeof magic) != 0)
        throw ValidationError("'" + path + "' is not a dataset file");
    std::uint32_t count = 0, fdim = 0, adim = 0;
    Dataset d;
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    in.read(reinterpret_cast<char*>(&fdim), sizeof fdim);
    in.read(reinterpret_cast<char*>(&adim), sizeof adim);
    in.read(reinterpret_cast<char*>(&d.seed), sizeof d.seed);
    if (!in || fdim != kFeatureDim || adim != kActionDim)
        throw ValidationError("'" + path + "' has incompatible dimensions");
    d.examples.resize(count);
    for (Example& e : d.examples) {
        double dims[4];
        in.read(reinterpret_cast<char*>(dims), sizeof dims);
        e.speed = dims[0];
        e.shape = {dims[1], dims[2], dims[3]};
        e.features.resize(kFeatureDim);
        e.actions.resize(kActionDim);
        in.read(reinterpret_cast<char*>(e.features.data()), kFeatureDim * sizeof(double));
        in.read(reinterpret_cast<char*>(e.actions.data()), kActionDim * sizeof(double));
        if (!in) throw ValidationError("'" + path + "' is truncated");
    }
    d.split();
    return d;
}

// --- training ---------------------------------------------------------------

double batch_loss(const PredictorModel& m, const std::vector<const Example*>& rows) {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (const Example* e : rows) {
        const std::vector<double> out = m.forward(e->features);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double d = out[k] - e->actions[k];
            total += d * d;
        }
    }
    return total / (static_cast<double>(rows.size()) * kActionDim);
}

Gradients batch_gradients(const PredictorModel& m, const std::vector<const Example*>& rows,
                          double* loss_out) {
    Gradients g;
    for (const Layer& L : m.layers) {
        g.w.emplace_back(L.w.size(), 0.0);
        g.b.emplace_back(L.b.size(), 0.0);
    }
    if (rows.empty()) {
        if (loss_out) *loss_out = 0.0;
        return g;
    }
    const double inv = 1.0 / (static_cast<double>(rows.size()) * kActionDim);
    double total = 0.0;
    std::vector<std::vector<double>> acts(m.layers.size() + 1);
    for (const Example* e : rows) {
        // forward, keeping activations
        acts[0] = e->features;
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            const Layer& L = m.layers[l];
            std::vector<double>& a = acts[l + 1];
            a.assign(static_cast<std::size_t>(L.out), 0.0);
            for (int o = 0; o < L.out; ++o) {
                const double* row = L.w.data() + static_cast<std::size_t>(o) * L.in;
                double acc = L.b[static_cast<std::size_t>(o)];
                for (int i = 0; i < L.in; ++i) acc += row[i] * acts[l][static_cast<std::size_t>(i)];
                a[static_cast<std::size_t>(o)] = std::tanh(acc);
            }
        }
        // output scaling and loss gradient
        const std::size_t last = m.layers.size() - 1;
        std::vector<double> delta(acts[last + 1].size());
        for (std::size_t k = 0; k < delta.size(); ++k) {
            const double t = acts[last + 1][k];
            const double out = m.a_max_abs * t;
            const double d = out - e->actions[k];
            total += d * d;
            // d(out)/dz = a_max * (1 - tanh^2)
            delta[k] = 2.0 * d * inv * m.a_max_abs * (1.0 - t * t);
        }
        // backward
        for (std::size_t l = m.layers.size(); l-- > 0;) {
            const Layer& L = m.layers[l];
            std::vector<double>& gw = g.w[l];
            std::vector<double>& gb = g.b[l];
            const std::vector<double>& a_in = acts[l];
            for (int o = 0; o < L.out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                gb[static_cast<std::size_t>(o)] += d;
                double* grow = gw.data() + static_cast<std::size_t>(o) * L.in;
                for (int i = 0; i < L.in; ++i) grow[i] += d * a_in[static_cast<std::size_t>(i)];
            }
            if (l == 0) break;
            std::vector<double> prev(static_cast<std::size_t>(L.in), 0.0);
            for (int o = 0; o < L.out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                const double* row = L.w.data() + static_cast<std::size_t>(o) * L.in;
                for (int i = 0; i < L.in; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
            }
            for (int i = 0; i < L.in; ++i) {
                const double a = a_in[static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] *= 1.0 - a * a;  // tanh' of the hidden activation
            }
            delta.swap(prev);
        }
    }
    if (loss_out) *loss_out = total * inv;
    return g;
}

PredictorModel train(const Dataset& data, const TrainHyper& hyper, TrainLog* log) {
    if (data.examples.empty()) throw ValidationError("cannot train on an empty dataset");
    if (hyper.batch <= 0 || hyper.epochs <= 0 || !(hyper.lr > 0.0))
        throw ValidationError("training hyperparameters must be positive");
    std::vector<std::uint32_t> train_idx = data.train_idx, val_idx = data.val_idx;
    if (train_idx.empty() && val_idx.empty())
        make_split(data.examples.size(), data.seed, train_idx, val_idx);
    if (train_idx.empty()) throw ValidationError("training split is empty");

    const auto rows_of = [&data](const std::vector<std::uint32_t>& idx) {
        std::vector<const Example*> rows;
        rows.reserve(idx.size());
        for (std::uint32_t i : idx) rows.push_back(&data.examples[i]);
        return rows;
    };
    const std::vector<const Example*> val_rows = rows_of(val_idx);

    Rng rng(hyper.init_seed);
    PredictorModel model = PredictorModel::init({kFeatureDim, 64, 64, kActionDim}, 8.0, rng);
    Gradients vel;
    for (const Layer& L : model.layers) {
        vel.w.emplace_back(L.w.size(), 0.0);
        vel.b.emplace_back(L.b.size(), 0.0);
    }

    PredictorModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    if (log) {
        log->epochs.clear();
        // constant-mean baseline from the training split
        std::vector<double> mean(kActionDim, 0.0);
        for (std::uint32_t i : train_idx)
            for (int k = 0; k < kActionDim; ++k)
                mean[static_cast<std::size_t>(k)] += data.examples[i].actions[static_cast<std::size_t>(k)];
        for (double& v : mean) v /= static_cast<double>(train_idx.size());
        double base = 0.0;
        const auto& base_rows = val_rows.empty() ? rows_of(train_idx) : val_rows;
        for (const Example* e : base_rows)
            for (int k = 0; k < kActionDim; ++k) {
                const double d = mean[static_cast<std::size_t>(k)] - e->actions[static_cast<std::size_t>(k)];
                base += d * d;
            }
        log->baseline_val = base / (static_cast<double>(base_rows.size()) * kActionDim);
    }

    std::vector<std::uint32_t> order = train_idx;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng erng = rng.derive("epoch", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[erng.uniform_index(i)]);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
            std::vector<const Example*> rows;
            rows.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) rows.push_back(&data.examples[order[i]]);
            double loss = 0.0;
            const Gradients g = batch_gradients(model, rows, &loss);
            if (!std::isfinite(loss))
                throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(rows.size());
            seen += rows.size();
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                Layer& L = model.layers[l];
                for (std::size_t i = 0; i < L.w.size(); ++i) {
                    vel.w[l][i] = hyper.momentum * vel.w[l][i] - hyper.lr * g.w[l][i];
                    L.w[i] += vel.w[l][i];
                }
                for (std::size_t i = 0; i < L.b.size(); ++i) {
                    vel.b[l][i] = hyper.momentum * vel.b[l][i] - hyper.lr * g.b[l][i];
                    L.b[i] += vel.b[l][i];
                }
            }
        }
        const double train_loss = epoch_loss / static_cast<double>(seen);
        const double val_loss = val_rows.empty() ? train_loss : batch_loss(model, val_rows);
        if (!std::isfinite(val_loss))
            throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch));
        if (log) log->epochs.push_back({epoch, train_loss, val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            best = model;
            best_epoch = epoch;
        }
    }
    if (log) {
        log->best_epoch = best_epoch;
        log->best_val = best_val;
    }
    return best;
}

void TrainLog::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "epoch,train_loss,val_loss\n";
    char line[96];
    for (const EpochStats& e : epochs) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_loss);
        out << line;
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

// --- evaluation ---------------------------------------------------------------

double grid_iou(const ClaimedSetGrid& a, const ClaimedSetGrid& b) {
    if (!(a.spec == b.spec)) throw ValidationError("iou needs grids on one window");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
        const bool va = a.occupancy[i] != 0, vb = b.occupancy[i] != 0;
        inter += va && vb;
        uni += va || vb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

IouMetrics evaluate_iou(const PredictorModel& model, const Dataset& data,
                        const SafetyProcedure& proc, bool validation_only) {
    std::vector<std::uint32_t> idx;
    if (validation_only) {
        idx = data.val_idx;
    } else {
        idx.resize(data.examples.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    }
    if (idx.empty()) throw ValidationError("nothing to evaluate");

    IouMetrics m;
    const double cell = 0.5;
    for (std::uint32_t i : idx) {
        const Example& e = data.examples[i];
        ActorState state;
        state.id = 0;
        state.position = {0.0, 0.0};
        state.heading = 0.0;
        state.speed = e.speed;
        // window sized for the slowest braking action and an unbraked horizon run
        const double reach = std::max(envelope_radius(state, e.shape, proc),
                                      e.speed * (proc.horizon + proc.dt) + e.shape.half_diagonal());
        const GridSpec spec = make_window({{0.0, 0.0}, {0.0, 0.0}}, reach + cell, cell);
        ActionSet label;
        for (int k = 0; k < kActionPairs; ++k)
            label.push_back({e.actions[static_cast<std::size_t>(2 * k)],
                             e.actions[static_cast<std::size_t>(2 * k + 1)]});
        const ClaimedSetGrid truth = action_claimed_set(label, state, e.shape, proc, spec);
        const ClaimedSetGrid pred =
            action_claimed_set(model.predict(e.features), state, e.shape, proc, spec);
        m.per_example.push_back(grid_iou(pred, truth));
    }
    std::vector<double> sorted = m.per_example;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    m.mean = sum / static_cast<double>(sorted.size());
    m.p10 = sorted[static_cast<std::size_t>(0.1 * (static_cast<double>(sorted.size()) - 1.0))];
    return m;
}

}  // namespace sff
