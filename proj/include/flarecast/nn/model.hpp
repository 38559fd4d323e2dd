#pragma once

#include "flarecast/nn/tensor.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace flarecast::nn {

/// A fixed-graph binary classifier: sequence batch in, one logit per row out.
/// forward() caches intermediates for backward(); infer() does not and is
/// safe to call concurrently on a shared instance.
class Model {
public:
    virtual ~Model() = default;

    virtual int input_size() const = 0;
    virtual Eigen::VectorXd forward(const Sequence& batch) = 0;
    virtual Eigen::VectorXd infer(const Sequence& batch) const = 0;
    /// Accumulates d loss / d parameter given d loss / d logit.
    virtual void backward(const Eigen::VectorXd& dlogits) = 0;
    virtual std::vector<Parameter*> parameters() = 0;
    virtual std::unique_ptr<Model> clone() const = 0;

    std::vector<const Parameter*> parameters() const;
    std::size_t parameter_count() const;
    void zero_grad();
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    std::size_t skipped = 0; // both gradients exactly zero
};

/// Applied to the analytic gradients before comparison; lets tests inject faults.
using GradientMutator = std::function<void(std::span<Parameter* const>)>;

/// Compares backward() against central differences (L(θ+ε) - L(θ-ε)) / 2ε of
/// the mean BCE loss for every parameter coordinate. The relative error of a
/// coordinate is |a - n| / max(|a|, |n|, abs_floor); coordinates where both
/// are zero are skipped. Parameters are restored afterwards.
GradCheckResult grad_check(Model& model, const Sequence& batch, std::span<const double> labels,
                           double epsilon = 1e-5, double abs_floor = 1e-6,
                           const GradientMutator& mutate = {});

/// Text checkpoint:
///   flarecast-checkpoint 1
///   config_hash <16 hex digits>
///   parameters <count>
///   then per parameter "<name> <rank> <dims...>" and one line of values.
void save_checkpoint(std::ostream& out, const Model& model, std::uint64_t config_hash);

/// Restores values into a model of the same architecture; returns the stored
/// config hash. Throws DomainError on a name, shape or version mismatch.
std::uint64_t load_checkpoint(std::istream& in, Model& model);

/// FNV-1a, stable across platforms; used for config hashes.
std::uint64_t fnv1a64(std::string_view text);

} // namespace flarecast::nn
