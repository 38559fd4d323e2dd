#include "flarecast/nn/model.hpp"

#include "flarecast/errors.hpp"
#include "flarecast/nn/loss.hpp"
#include "flarecast/textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace flarecast::nn {

std::vector<const Parameter*> Model::parameters() const {
    auto params = const_cast<Model*>(this)->parameters();
    return {params.begin(), params.end()};
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const Parameter* p : parameters()) {
        n += p->value.size();
    }
    return n;
}

void Model::zero_grad() {
    for (Parameter* p : parameters()) {
        p->grad.fill(0.0);
    }
}

GradCheckResult grad_check(Model& model, const Sequence& batch, std::span<const double> labels, double epsilon,
                           double abs_floor, const GradientMutator& mutate) {
    auto loss_at = [&]() { return bce_with_logits(model.infer(batch), labels, nullptr); };

    model.zero_grad();
    Eigen::VectorXd dlogits;
    bce_with_logits(model.forward(batch), labels, &dlogits);
    model.backward(dlogits);

    auto params = model.parameters();
    if (mutate) {
        mutate(params);
    }

    GradCheckResult result;
    for (Parameter* p : params) {
        auto values = p->value.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + epsilon;
            const double up = loss_at();
            values[i] = original - epsilon;
            const double down = loss_at();
            values[i] = original;

            const double numeric = (up - down) / (2.0 * epsilon);
            const double analytic = p->grad[i];
            if (numeric == 0.0 && analytic == 0.0) {
                ++result.skipped;
                continue;
            }
            ++result.checked;
            const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_parameter = p->name;
                result.worst_index = i;
            }
        }
    }
    return result;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

constexpr const char* kMagic = "flarecast-checkpoint";
constexpr int kVersion = 1;

} // namespace

void save_checkpoint(std::ostream& out, const Model& model, std::uint64_t config_hash) {
    const auto params = model.parameters();
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
    out << kMagic << ' ' << kVersion << '\n';
    out << "config_hash " << hash << '\n';
    out << "parameters " << params.size() << '\n';
    for (const Parameter* p : params) {
        out << p->name << ' ' << p->value.shape().size();
        for (auto dim : p->value.shape()) {
            out << ' ' << dim;
        }
        out << '\n';
        bool first = true;
        for (double v : p->value.values()) {
            out << (first ? "" : " ") << format_double(v);
            first = false;
        }
        out << '\n';
    }
}

std::uint64_t load_checkpoint(std::istream& in, Model& model) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) {
        throw DomainError("not a flarecast checkpoint");
    }
    if (version != kVersion) {
        throw DomainError("unsupported checkpoint version " + std::to_string(version));
    }
    std::string key, hash_text;
    std::size_t count = 0;
    if (!(in >> key >> hash_text) || key != "config_hash") {
        throw DomainError("checkpoint is missing config_hash");
    }
    if (!(in >> key >> count) || key != "parameters") {
        throw DomainError("checkpoint is missing parameter count");
    }
    auto params = model.parameters();
    if (count != params.size()) {
        throw DomainError("checkpoint holds " + std::to_string(count) + " parameters, model has " +
                          std::to_string(params.size()));
    }
    for (Parameter* p : params) {
        std::string name;
        std::size_t rank = 0;
        if (!(in >> name >> rank) || name != p->name) {
            throw DomainError("checkpoint parameter mismatch at " + p->name);
        }
        std::vector<std::size_t> shape(rank);
        for (auto& dim : shape) {
            in >> dim;
        }
        if (shape != p->value.shape()) {
            throw DomainError("checkpoint shape mismatch for " + p->name);
        }
        for (auto& v : p->value.values()) {
            std::string token;
            in >> token;
            const auto parsed = parse_double(token);
            if (!parsed) {
                throw DomainError("checkpoint value unreadable for " + p->name);
            }
            v = *parsed;
        }
    }
    return std::stoull(hash_text, nullptr, 16);
}

} // namespace flarecast::nn
