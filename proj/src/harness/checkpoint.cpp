#include "teach/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace teach {

namespace {

static_assert(sizeof(double) == 8);

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

class Writer {
public:
    template <typename T>
    void put(T v) {
        v = byteswap_if_big(v);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes.insert(bytes.end(), p, p + n);
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    template <typename T>
    T get(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return byteswap_if_big(v);
    }
    std::string get_string(std::size_t n) {
        need(n, "tensor name");
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

NamedTensor tensor(std::string name, const Mat& m) {
    NamedTensor t;
    t.name = std::move(name);
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.reserve(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

NamedTensor tensor(std::string name, const Vec& v) {
    NamedTensor t;
    t.name = std::move(name);
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

NamedTensor tensor(std::string name, std::vector<double> values) {
    NamedTensor t;
    t.name = std::move(name);
    t.dims = {static_cast<std::uint32_t>(values.size())};
    t.data = std::move(values);
    return t;
}

class TensorTable {
public:
    explicit TensorTable(const std::vector<NamedTensor>& tensors) {
        for (const auto& t : tensors) by_name_[t.name] = &t;
    }
    bool has(const std::string& name) const { return by_name_.contains(name); }
    const NamedTensor& get(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
        return *it->second;
    }
    Mat matrix(const std::string& name) const {
        const auto& t = get(name);
        if (t.dims.size() != 2) throw CheckpointError("tensor '" + name + "' is not a matrix");
        Mat m(t.dims[0], t.dims[1]);
        std::size_t i = 0;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[i++];
        return m;
    }
    Vec vector(const std::string& name) const {
        const auto& t = get(name);
        if (t.dims.size() != 1) throw CheckpointError("tensor '" + name + "' is not a vector");
        return Eigen::Map<const Vec>(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
    }
    std::vector<double> values(const std::string& name, std::size_t expected) const {
        const auto& t = get(name);
        if (t.data.size() != expected)
            throw CheckpointError("tensor '" + name + "' has " + std::to_string(t.data.size()) +
                                  " entries, expected " + std::to_string(expected));
        return t.data;
    }

private:
    std::map<std::string, const NamedTensor*> by_name_;
};

void put_mlp(std::vector<NamedTensor>& out, const std::string& prefix, const MlpParams& p) {
    std::vector<double> acts;
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        acts.push_back(static_cast<double>(p.layers[k].activation));
        out.push_back(tensor(prefix + "." + std::to_string(k) + ".weight", p.layers[k].weight));
        out.push_back(tensor(prefix + "." + std::to_string(k) + ".bias", p.layers[k].bias));
    }
    out.push_back(tensor(prefix + ".activations", std::move(acts)));
}

MlpParams get_mlp(const TensorTable& t, const std::string& prefix) {
    const Vec acts = t.vector(prefix + ".activations");
    MlpParams p;
    for (Eigen::Index k = 0; k < acts.size(); ++k) {
        DenseLayer l;
        const int code = static_cast<int>(acts(k));
        if (code < 0 || code > 2) throw CheckpointError("bad activation code in '" + prefix + "'");
        l.activation = static_cast<Activation>(code);
        l.weight = t.matrix(prefix + "." + std::to_string(k) + ".weight");
        l.bias = t.vector(prefix + "." + std::to_string(k) + ".bias");
        p.layers.push_back(std::move(l));
    }
    try {
        check_shapes(p);
    } catch (const ContractError& e) {
        throw CheckpointError("network '" + prefix + "': " + e.what());
    }
    return p;
}

void put_grads(std::vector<NamedTensor>& out, const std::string& prefix, const ParamGrads& g) {
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
        out.push_back(tensor(prefix + "." + std::to_string(k) + ".weight", g.weight[k]));
        out.push_back(tensor(prefix + "." + std::to_string(k) + ".bias", g.bias[k]));
    }
}

ParamGrads get_grads(const TensorTable& t, const std::string& prefix, const MlpParams& like) {
    ParamGrads g;
    for (std::size_t k = 0; k < like.layers.size(); ++k) {
        g.weight.push_back(t.matrix(prefix + "." + std::to_string(k) + ".weight"));
        g.bias.push_back(t.vector(prefix + "." + std::to_string(k) + ".bias"));
        if (g.weight[k].rows() != like.layers[k].weight.rows() ||
            g.weight[k].cols() != like.layers[k].weight.cols() || g.bias[k].size() != like.layers[k].bias.size())
            throw CheckpointError("optimizer moments '" + prefix + "' do not match the network");
    }
    return g;
}

void put_optimizer(std::vector<NamedTensor>& out, const std::string& prefix, const OptimizerState& s) {
    out.push_back(tensor(prefix + ".state", std::vector<double>{static_cast<double>(s.step), s.beta1, s.beta2,
                                                                s.epsilon}));
    put_grads(out, prefix + ".m", s.first_moment);
    put_grads(out, prefix + ".v", s.second_moment);
}

OptimizerState get_optimizer(const TensorTable& t, const std::string& prefix, const MlpParams& like) {
    const auto st = t.values(prefix + ".state", 4);
    OptimizerState s;
    s.step = static_cast<long>(st[0]);
    s.beta1 = st[1];
    s.beta2 = st[2];
    s.epsilon = st[3];
    s.first_moment = get_grads(t, prefix + ".m", like);
    s.second_moment = get_grads(t, prefix + ".v", like);
    return s;
}

}  // namespace

std::vector<std::uint8_t> encode_tensors(const std::vector<NamedTensor>& tensors, std::uint32_t version) {
    Writer w;
    w.put_raw(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.put<std::uint32_t>(version);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        std::size_t expected = 1;
        for (auto d : t.dims) expected *= d;
        if (expected != t.data.size())
            throw ContractError("encode_tensors: '" + t.name + "' dims do not match data length");
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
        w.put_raw(t.name.data(), t.name.size());
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.dims.size()));
        for (auto d : t.dims) w.put<std::uint32_t>(d);
        for (double x : t.data) w.put<double>(x);
    }
    return std::move(w.bytes);
}

std::vector<NamedTensor> decode_tensors(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(kCheckpointMagic)) throw CheckpointError("checkpoint truncated while reading magic");
    if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw CheckpointError("not a checkpoint: bad magic bytes");
    std::vector<std::uint8_t> rest(bytes.begin() + sizeof(kCheckpointMagic), bytes.end());
    Reader r(rest);
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>("tensor count");
    std::vector<NamedTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = r.get_string(r.get<std::uint32_t>("name length"));
        const auto rank = r.get<std::uint32_t>("rank");
        std::size_t n = 1;
        for (std::uint32_t k = 0; k < rank; ++k) {
            t.dims.push_back(r.get<std::uint32_t>("dims"));
            n *= t.dims.back();
        }
        if (n > rest.size() / sizeof(double)) throw CheckpointError("checkpoint truncated in tensor '" + t.name + "'");
        t.data.resize(n);
        for (auto& x : t.data) x = r.get<double>("tensor data");
        out.push_back(std::move(t));
    }
    if (!r.done()) throw CheckpointError("checkpoint has trailing bytes");
    return out;
}

std::vector<NamedTensor> checkpoint_tensors(const Checkpoint& ck) {
    std::vector<NamedTensor> out;
    const auto& a = ck.agent;
    const auto& c = a.config;
    out.push_back(tensor("agent.config",
                         std::vector<double>{static_cast<double>(c.state_dim), static_cast<double>(c.goal_dim),
                                             static_cast<double>(c.action_dim),
                                             static_cast<double>(c.hidden_width),
                                             static_cast<double>(c.hidden_layers), c.gamma, c.noise_scale,
                                             c.random_action_prob, c.learning_rate}));
    out.push_back(tensor("agent.input_low", c.input_low));
    out.push_back(tensor("agent.input_high", c.input_high));
    out.push_back(tensor("agent.input_center", a.input_center));
    out.push_back(tensor("agent.input_scale", a.input_scale));
    put_mlp(out, "actor", a.actor);
    put_mlp(out, "critic", a.critic);
    put_mlp(out, "target_actor", a.target_actor);
    put_mlp(out, "target_critic", a.target_critic);
    put_optimizer(out, "actor_opt", a.actor_opt);
    put_optimizer(out, "critic_opt", a.critic_opt);

    const auto& t = ck.teacher;
    const auto n = t.goals.size();
    const auto gd = n > 0 ? t.goals.front().size() : 0;
    out.push_back(tensor(
        "teacher.config",
        std::vector<double>{static_cast<double>(t.config.method), static_cast<double>(t.config.window),
                            static_cast<double>(t.config.interplay), static_cast<double>(t.config.goal_count),
                            static_cast<double>(t.config.probe_count), static_cast<double>(t.config.ensemble_size),
                            t.value_floor, t.curriculum_ready ? 1.0 : 0.0}));
    Mat goals(n, gd);
    for (std::size_t i = 0; i < n; ++i) goals.row(static_cast<Eigen::Index>(i)) = t.goals[i].transpose();
    out.push_back(tensor("teacher.goals", goals));
    out.push_back(tensor("teacher.weights", t.weights));
    Mat history = Mat::Zero(n, t.config.window);
    std::vector<double> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& h = t.histories[i];
        for (std::size_t k = 0; k < h.size(); ++k)
            history(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = h[k];
        counts.push_back(static_cast<double>(h.size()));
    }
    out.push_back(tensor("teacher.history", history));
    out.push_back(tensor("teacher.history_count", std::move(counts)));

    if (ck.ensemble) {
        const auto& e = *ck.ensemble;
        out.push_back(tensor("ensemble.size", std::vector<double>{static_cast<double>(e.critics.size())}));
        for (std::size_t k = 0; k < e.critics.size(); ++k) {
            const std::string p = "ensemble." + std::to_string(k);
            put_mlp(out, p + ".critic", e.critics[k]);
            put_mlp(out, p + ".target", e.targets[k]);
            put_optimizer(out, p + ".opt", e.optimizers[k]);
        }
    }
    return out;
}

Checkpoint checkpoint_from_tensors(const std::vector<NamedTensor>& tensors) {
    const TensorTable t(tensors);
    Checkpoint ck;
    auto& a = ck.agent;
    const auto cfg = t.values("agent.config", 9);
    a.config.state_dim = static_cast<int>(cfg[0]);
    a.config.goal_dim = static_cast<int>(cfg[1]);
    a.config.action_dim = static_cast<int>(cfg[2]);
    a.config.hidden_width = static_cast<int>(cfg[3]);
    a.config.hidden_layers = static_cast<int>(cfg[4]);
    a.config.gamma = cfg[5];
    a.config.noise_scale = cfg[6];
    a.config.random_action_prob = cfg[7];
    a.config.learning_rate = cfg[8];
    a.config.input_low = t.vector("agent.input_low");
    a.config.input_high = t.vector("agent.input_high");
    a.input_center = t.vector("agent.input_center");
    a.input_scale = t.vector("agent.input_scale");
    a.actor = get_mlp(t, "actor");
    a.critic = get_mlp(t, "critic");
    a.target_actor = get_mlp(t, "target_actor");
    a.target_critic = get_mlp(t, "target_critic");
    if (!same_shape(a.actor, a.target_actor) || !same_shape(a.critic, a.target_critic))
        throw CheckpointError("target networks do not mirror the online networks");
    a.actor_opt = get_optimizer(t, "actor_opt", a.actor);
    a.critic_opt = get_optimizer(t, "critic_opt", a.critic);

    auto& s = ck.teacher;
    const auto tc = t.values("teacher.config", 8);
    const int method = static_cast<int>(tc[0]);
    if (method < 0 || method > static_cast<int>(TeacherMethod::procurl))
        throw CheckpointError("bad teacher method code");
    s.config.method = static_cast<TeacherMethod>(method);
    s.config.window = static_cast<int>(tc[1]);
    s.config.interplay = static_cast<int>(tc[2]);
    s.config.goal_count = static_cast<int>(tc[3]);
    s.config.probe_count = static_cast<int>(tc[4]);
    s.config.ensemble_size = static_cast<int>(tc[5]);
    s.value_floor = tc[6];
    s.curriculum_ready = tc[7] != 0.0;
    const Mat goals = t.matrix("teacher.goals");
    for (Eigen::Index i = 0; i < goals.rows(); ++i) s.goals.push_back(goals.row(i).transpose());
    const auto n = s.goals.size();
    s.weights = t.values("teacher.weights", n);
    const Mat history = t.matrix("teacher.history");
    const auto counts = t.values("teacher.history_count", n);
    if (static_cast<std::size_t>(history.rows()) != n || history.cols() != s.config.window)
        throw CheckpointError("teacher history has the wrong shape");
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = static_cast<Eigen::Index>(counts[i]);
        if (m < 0 || m > history.cols()) throw CheckpointError("teacher history count out of range");
        std::vector<double> h(static_cast<std::size_t>(m));
        for (Eigen::Index k = 0; k < m; ++k) h[k] = history(static_cast<Eigen::Index>(i), k);
        s.histories.push_back(std::move(h));
    }

    if (t.has("ensemble.size")) {
        const auto k = static_cast<std::size_t>(t.values("ensemble.size", 1)[0]);
        CriticEnsemble e;
        for (std::size_t i = 0; i < k; ++i) {
            const std::string p = "ensemble." + std::to_string(i);
            e.critics.push_back(get_mlp(t, p + ".critic"));
            e.targets.push_back(get_mlp(t, p + ".target"));
            e.optimizers.push_back(get_optimizer(t, p + ".opt", e.critics.back()));
        }
        ck.ensemble = std::move(e);
    }
    return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    const auto bytes = encode_tensors(checkpoint_tensors(checkpoint));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_tensors(decode_tensors(bytes));
}

}  // namespace teach
