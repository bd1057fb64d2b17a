#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dualprobe/errors.hpp"
#include "dualprobe/trace_store.hpp"

namespace dualprobe::tinylm {

enum class Activation { relu, gelu };

struct ModelConfig {
    std::uint32_t vocab_size = 0;   // >= 2 so a stop token can exist
    std::uint32_t d_model = 0;
    std::uint32_t ffn_width = 0;
    std::uint32_t num_layers = 0;
    std::uint32_t num_heads = 1;    // must divide d_model
    std::uint32_t max_seq_len = 0;
    Activation activation = Activation::relu;
    std::uint64_t seed = 0;

    void validate() const;
};

// Row-major matrix, rows x cols.
struct Matrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::uint32_t r, std::uint32_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

    float& at(std::uint32_t r, std::uint32_t c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    float at(std::uint32_t r, std::uint32_t c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct LayerWeights {
    Matrix wq, wk, wv, wo;  // each d_model x d_model
    Matrix w_up;            // ffn_width x d_model
    Matrix w_down;          // d_model x ffn_width
};

// Immutable after construction; generations may share one instance across
// threads, each owning its private KV state and trace buffer.
struct ModelWeights {
    ModelConfig config;
    Matrix token_embedding;  // vocab_size x d_model
    Matrix pos_embedding;    // max_seq_len x d_model
    std::vector<LayerWeights> layers;
    Matrix output_proj;  // vocab_size x d_model
};

// Set of (neuron, layer) coordinates whose contribution to W_down's input is
// forced to zero. Recording is unaffected: traces always hold the raw
// post-activation values.
struct MaskSpec {
    std::set<std::pair<std::uint32_t, std::uint32_t>> masked;  // (neuron j, layer l)

    bool contains(std::uint32_t neuron, std::uint32_t layer) const {
        return masked.count({neuron, layer}) > 0;
    }
    void validate(const ModelConfig& config) const;
};

struct GenerationSettings {
    double temperature = 0.0;           // 0 means greedy, fully deterministic
    std::uint32_t max_new_tokens = 1024;
    std::vector<std::uint32_t> stop_tokens;
    std::uint64_t sample_seed = 0;      // only used when temperature > 0
};

struct TraceMeta {
    std::string model_id;
    std::string question_id;
    std::string language;
    std::string culture;
};

struct GenerationResult {
    std::vector<std::uint32_t> response;
    trace::ActivationTrace trace;
};

// Seeded pseudo-random weights; the same (config, seed) yields bit-identical
// weights.
ModelWeights init_model(const ModelConfig& config);

// Autoregressive decode. Trace row t holds, per layer, the post-activation
// FFN vector of the forward step that produced response token t (so the step
// whose input is the final prompt token fills row 0). Prompt steps are not
// recorded; masking zeroes a neuron's forward contribution at every step but
// never its recorded value.
GenerationResult generate_with_recording(const ModelWeights& weights, const MaskSpec* mask,
                                         const std::vector<std::uint32_t>& prompt,
                                         const GenerationSettings& settings, const TraceMeta& meta);

// Teacher-forced variant: records traces as if the model had emitted
// `forced_response`. Offered for probing externally produced answers; free
// generation is the reference behaviour.
GenerationResult trace_forced_response(const ModelWeights& weights, const MaskSpec* mask,
                                       const std::vector<std::uint32_t>& prompt,
                                       const std::vector<std::uint32_t>& forced_response,
                                       const TraceMeta& meta);

// Constructed weights in which one known neuron provably controls one known
// prediction: with `trigger_token` as the final prompt token the greedy next
// token is `gated_output` and `gate_neuron` out-activates its layer by >= 10x;
// masking the gate flips the prediction to the fallback token; on non-trigger
// input the gate stays below its layer median. All other neurons carry
// distinct low-amplitude activations and zero W_down columns, so only the
// gate influences the forward pass.
ModelWeights plant_gate_model(const ModelConfig& config, std::uint32_t trigger_token,
                              std::uint32_t gated_output,
                              std::pair<std::uint32_t, std::uint32_t> gate_neuron);

// The fallback token plant_gate_model predicts when the gate is inactive or
// masked: the smallest token id distinct from trigger and gated output.
std::uint32_t planted_fallback_token(std::uint32_t vocab_size, std::uint32_t trigger_token,
                                     std::uint32_t gated_output);

// Fixture tokenizer: a fixed byte-level vocabulary (or a restricted alphabet)
// mapping one byte to one token id; id alphabet_size() is the stop token.
class CharTokenizer {
  public:
    // Byte-level: 256 byte tokens + stop.
    CharTokenizer();
    // Restricted alphabet: token i <-> alphabet[i], plus stop.
    explicit CharTokenizer(const std::string& alphabet);

    std::uint32_t vocab_size() const noexcept { return static_cast<std::uint32_t>(alphabet_.size()) + 1; }
    std::uint32_t stop_token() const noexcept { return static_cast<std::uint32_t>(alphabet_.size()); }

    std::vector<std::uint32_t> encode(const std::string& text) const;
    std::string decode(const std::vector<std::uint32_t>& tokens) const;

  private:
    std::string alphabet_;
    std::vector<std::int32_t> byte_to_token_;  // 256 entries, -1 where unmapped
};

// Weight checkpoints share the trace container framing: magic "NWTS" |
// u32 LE version | u32 LE header length | JSON header | float32 LE tensors
// in declared order.
std::size_t save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace dualprobe::tinylm
