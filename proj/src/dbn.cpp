#include "pbit/dbn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "pbit/parallel.hpp"
#include "pbit/rng.hpp"

namespace pbit {

namespace {

inline float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

float dot(const float *a, const float *b, std::size_t n)
{
	float acc = 0.0f;
	for (std::size_t i = 0; i < n; ++i) {
		acc += a[i] * b[i];
	}
	return acc;
}

void shuffled_indices(std::vector<std::uint32_t> &idx, Rng &rng)
{
	for (std::size_t i = idx.size(); i > 1; --i) {
		const std::size_t j = rng.next() % i;
		std::swap(idx[i - 1], idx[j]);
	}
}

void check_finite(const Matrix &m, const std::vector<float> &bias)
{
	for (float v : m.data) {
		if (!std::isfinite(v)) {
			throw DataError("divergent training: non-finite weight");
		}
	}
	for (float v : bias) {
		if (!std::isfinite(v)) {
			throw DataError("divergent training: non-finite bias");
		}
	}
}

// One-step contrastive divergence pretraining of a single RBM on the given
// feature rows: minibatch gradients with momentum (0.5 for the first five
// epochs, then 0.9) and a small weight decay. Returns the trained
// (weight, hidden bias) pair; the visible bias is only needed during
// training and is dropped afterwards.
DbnLayer train_rbm(const std::vector<float> &features, std::size_t n_samples,
                   int n_visible, int n_hidden, const TrainHyper &hyper,
                   std::uint64_t seed)
{
	constexpr float kWeightDecay = 2e-4f;

	Rng init_rng(derive_seed(seed, 0));
	DbnLayer layer;
	layer.weight = Matrix::zeros(n_hidden, n_visible);
	layer.bias.assign(n_hidden, 0.0f);
	for (auto &w : layer.weight.data) {
		w = static_cast<float>(0.01 * init_rng.normal());
	}
	std::vector<float> visible_bias(n_visible, 0.0f);

	std::vector<std::uint32_t> order(n_samples);
	std::iota(order.begin(), order.end(), 0u);

	std::vector<float> h_prob(n_hidden), h_sample(n_hidden), h_neg(n_hidden);
	std::vector<float> v_prob(n_visible);
	std::vector<float> grad_w(std::size_t(n_hidden) * n_visible);
	std::vector<float> grad_hb(n_hidden), grad_vb(n_visible);
	std::vector<float> vel_w(grad_w.size(), 0.0f);
	std::vector<float> vel_hb(n_hidden, 0.0f), vel_vb(n_visible, 0.0f);

	for (int epoch = 0; epoch < hyper.cd_epochs; ++epoch) {
		const float momentum = epoch < 5 ? 0.5f : 0.9f;
		Rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(epoch)));
		shuffled_indices(order, rng);
		for (std::size_t start = 0; start < n_samples;
		     start += hyper.batch) {
			const std::size_t stop =
			    std::min(n_samples, start + hyper.batch);
			std::fill(grad_w.begin(), grad_w.end(), 0.0f);
			std::fill(grad_hb.begin(), grad_hb.end(), 0.0f);
			std::fill(grad_vb.begin(), grad_vb.end(), 0.0f);

			for (std::size_t s = start; s < stop; ++s) {
				const float *v0 =
				    features.data() + std::size_t(order[s]) * n_visible;

				// Positive phase.
				for (int j = 0; j < n_hidden; ++j) {
					h_prob[j] = sigmoidf(
					    dot(layer.weight.row(j), v0, n_visible) +
					    layer.bias[j]);
					h_sample[j] = rng.bernoulli(h_prob[j]) ? 1.0f : 0.0f;
				}
				// Reconstruction (probabilities, as usual for CD-1).
				std::copy(visible_bias.begin(), visible_bias.end(),
				          v_prob.begin());
				for (int j = 0; j < n_hidden; ++j) {
					if (h_sample[j] != 0.0f) {
						const float *wj = layer.weight.row(j);
						for (int i = 0; i < n_visible; ++i) {
							v_prob[i] += wj[i];
						}
					}
				}
				for (int i = 0; i < n_visible; ++i) {
					v_prob[i] = sigmoidf(v_prob[i]);
				}
				// Negative phase.
				for (int j = 0; j < n_hidden; ++j) {
					h_neg[j] = sigmoidf(
					    dot(layer.weight.row(j), v_prob.data(), n_visible) +
					    layer.bias[j]);
				}
				for (int j = 0; j < n_hidden; ++j) {
					float *gw = grad_w.data() + std::size_t(j) * n_visible;
					const float hp = h_prob[j];
					const float hn = h_neg[j];
					for (int i = 0; i < n_visible; ++i) {
						gw[i] += hp * v0[i] - hn * v_prob[i];
					}
					grad_hb[j] += hp - hn;
				}
				for (int i = 0; i < n_visible; ++i) {
					grad_vb[i] += v0[i] - v_prob[i];
				}
			}

			const float scale =
			    hyper.learning_rate / static_cast<float>(stop - start);
			for (std::size_t k = 0; k < grad_w.size(); ++k) {
				vel_w[k] = momentum * vel_w[k] +
				           scale * grad_w[k] -
				           hyper.learning_rate * kWeightDecay *
				               layer.weight.data[k];
				layer.weight.data[k] += vel_w[k];
			}
			for (int j = 0; j < n_hidden; ++j) {
				vel_hb[j] = momentum * vel_hb[j] + scale * grad_hb[j];
				layer.bias[j] += vel_hb[j];
			}
			for (int i = 0; i < n_visible; ++i) {
				vel_vb[i] = momentum * vel_vb[i] + scale * grad_vb[i];
				visible_bias[i] += vel_vb[i];
			}
		}
		check_finite(layer.weight, layer.bias);
	}
	return layer;
}

// One-vs-rest logistic readout trained by SGD. Each output unit is an
// independent logistic regressor, so the class scores it learns live
// exactly where the output p-bits operate: the true class is driven toward
// probability 1 and every other class toward 0, instead of a softmax whose
// ranking information can sit far into sigmoid saturation.
DbnLayer train_readout(const std::vector<float> &features,
                       const std::vector<std::uint8_t> &labels,
                       std::size_t n_samples, int n_in, int n_out,
                       const TrainHyper &hyper, std::uint64_t seed)
{
	Rng init_rng(derive_seed(seed, 0));
	DbnLayer layer;
	layer.weight = Matrix::zeros(n_out, n_in);
	layer.bias.assign(n_out, 0.0f);
	for (auto &w : layer.weight.data) {
		w = static_cast<float>(0.01 * init_rng.normal());
	}

	std::vector<std::uint32_t> order(n_samples);
	std::iota(order.begin(), order.end(), 0u);

	float lr = hyper.learning_rate;
	for (int epoch = 0; epoch < hyper.readout_epochs; ++epoch) {
		Rng rng(derive_seed(seed, 2, static_cast<std::uint64_t>(epoch)));
		shuffled_indices(order, rng);
		for (std::uint32_t sample : order) {
			const float *x = features.data() + std::size_t(sample) * n_in;
			for (int k = 0; k < n_out; ++k) {
				const float z =
				    dot(layer.weight.row(k), x, n_in) + layer.bias[k];
				const float grad =
				    sigmoidf(z) - (labels[sample] == k ? 1.0f : 0.0f);
				float *wk = layer.weight.row(k);
				const float step = lr * grad;
				for (int i = 0; i < n_in; ++i) {
					wk[i] -= step * x[i];
				}
				layer.bias[k] -= step;
			}
		}
		lr *= 0.97f;
		check_finite(layer.weight, layer.bias);
	}
	return layer;
}

}  // namespace

void DbnModel::validate() const
{
	if (topology.size() < 2) {
		throw DataError("model topology needs at least two layers");
	}
	if (layers.size() != topology.size() - 1) {
		throw DataError("model layer count does not match topology");
	}
	for (std::size_t l = 0; l < layers.size(); ++l) {
		const auto &layer = layers[l];
		if (layer.weight.rows != topology[l + 1] ||
		    layer.weight.cols != topology[l] ||
		    layer.weight.data.size() !=
		        std::size_t(layer.weight.rows) * layer.weight.cols ||
		    layer.bias.size() != std::size_t(topology[l + 1])) {
			throw DataError("model layer dimensions are inconsistent");
		}
	}
	if (duty_cycles.size() != pbit_count()) {
		throw DataError("model duty-cycle table has the wrong size");
	}
}

DbnModel train_cd1(const Dataset &train, const std::vector<int> &topology,
                   const TrainHyper &hyper)
{
	if (train.size() == 0) {
		throw DataError("empty training set");
	}
	if (topology.size() < 2 ||
	    topology.front() !=
	        static_cast<int>(train.pixels_per_image()) ||
	    topology.back() != 10) {
		throw DataError("topology does not match the dataset");
	}
	if (hyper.batch < 1 || hyper.learning_rate <= 0.0f) {
		throw DataError("bad training hyperparameters");
	}

	DbnModel model;
	model.topology = topology;
	model.meta = hyper;

	// Greedy pretraining: each hidden layer is an RBM trained on the
	// previous layer's (deterministic) activation probabilities, then
	// sharpened by the hidden gain.
	std::vector<float> features = train.pixels;
	std::size_t n = train.size();
	for (std::size_t pair = 0; pair + 2 < topology.size(); ++pair) {
		const int n_in = topology[pair];
		const int n_out = topology[pair + 1];
		DbnLayer layer =
		    train_rbm(features, n, n_in, n_out, hyper,
		              derive_seed(hyper.seed, 100 + pair));
		for (auto &w : layer.weight.data) {
			w *= hyper.hidden_gain;
		}
		for (auto &b : layer.bias) {
			b *= hyper.hidden_gain;
		}

		std::vector<float> next(n * static_cast<std::size_t>(n_out));
		for (std::size_t s = 0; s < n; ++s) {
			const float *x = features.data() + s * n_in;
			float *y = next.data() + s * n_out;
			for (int j = 0; j < n_out; ++j) {
				y[j] = sigmoidf(dot(layer.weight.row(j), x, n_in) +
				                layer.bias[j]);
			}
		}
		features = std::move(next);
		model.layers.push_back(std::move(layer));
	}

	model.layers.push_back(train_readout(
	    features, train.labels, n, topology[topology.size() - 2],
	    topology.back(), hyper, derive_seed(hyper.seed, 200)));

	// Training-set duty cycle of every p-bit, from a full analog forward
	// pass over the training set.
	model.duty_cycles.assign(model.pbit_count(), 0.0f);
	{
		std::size_t base = 0;
		std::vector<float> prev = train.pixels;
		for (std::size_t l = 0; l < model.layers.size(); ++l) {
			const int n_in = model.topology[l];
			const int n_out = model.topology[l + 1];
			std::vector<float> next(n * static_cast<std::size_t>(n_out));
			for (std::size_t s2 = 0; s2 < n; ++s2) {
				const float *x = prev.data() + s2 * n_in;
				float *y = next.data() + s2 * n_out;
				for (int j = 0; j < n_out; ++j) {
					y[j] = sigmoidf(
					    dot(model.layers[l].weight.row(j), x, n_in) +
					    model.layers[l].bias[j]);
					model.duty_cycles[base + j] += y[j];
				}
			}
			for (int j = 0; j < n_out; ++j) {
				model.duty_cycles[base + j] /= static_cast<float>(n);
			}
			base += n_out;
			prev = std::move(next);
		}
	}
	model.validate();
	return model;
}

namespace {

constexpr char kModelMagic[8] = {'P', 'B', 'I', 'T', 'D', 'B', 'N', '1'};

template <typename T>
void write_pod(std::ofstream &out, const T &value)
{
	out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream &in, const std::string &path)
{
	T value;
	in.read(reinterpret_cast<char *>(&value), sizeof(T));
	if (!in) {
		throw DataError("truncated model file " + path);
	}
	return value;
}

}  // namespace

void save_model(const DbnModel &model, const std::string &path)
{
	model.validate();
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw DataError("cannot write model file " + path);
	}
	out.write(kModelMagic, sizeof(kModelMagic));
	write_pod(out, static_cast<std::uint32_t>(model.topology.size()));
	for (int width : model.topology) {
		write_pod(out, static_cast<std::uint32_t>(width));
	}
	for (const auto &layer : model.layers) {
		write_pod(out, static_cast<std::uint32_t>(layer.weight.rows));
		write_pod(out, static_cast<std::uint32_t>(layer.weight.cols));
		out.write(reinterpret_cast<const char *>(layer.weight.data.data()),
		          std::streamsize(layer.weight.data.size() * sizeof(float)));
		out.write(reinterpret_cast<const char *>(layer.bias.data()),
		          std::streamsize(layer.bias.size() * sizeof(float)));
	}
	out.write(reinterpret_cast<const char *>(model.duty_cycles.data()),
	          std::streamsize(model.duty_cycles.size() * sizeof(float)));
	write_pod(out, model.meta.learning_rate);
	write_pod(out, model.meta.hidden_gain);
	write_pod(out, static_cast<std::uint32_t>(model.meta.cd_epochs));
	write_pod(out, static_cast<std::uint32_t>(model.meta.readout_epochs));
	write_pod(out, static_cast<std::uint32_t>(model.meta.batch));
	write_pod(out, model.meta.seed);
	if (!out) {
		throw DataError("failed writing model file " + path);
	}
}

DbnModel load_model(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw DataError("cannot open model file " + path);
	}
	char magic[8];
	in.read(magic, sizeof(magic));
	if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
		throw DataError("not a model file (bad magic): " + path);
	}

	DbnModel model;
	const auto n_layers = read_pod<std::uint32_t>(in, path);
	if (n_layers < 2 || n_layers > 64) {
		throw DataError("implausible topology in model file " + path);
	}
	model.topology.resize(n_layers);
	for (auto &width : model.topology) {
		width = static_cast<int>(read_pod<std::uint32_t>(in, path));
	}
	for (std::uint32_t l = 0; l + 1 < n_layers; ++l) {
		DbnLayer layer;
		const auto rows = read_pod<std::uint32_t>(in, path);
		const auto cols = read_pod<std::uint32_t>(in, path);
		layer.weight = Matrix::zeros(static_cast<int>(rows),
		                             static_cast<int>(cols));
		in.read(reinterpret_cast<char *>(layer.weight.data.data()),
		        std::streamsize(layer.weight.data.size() * sizeof(float)));
		layer.bias.resize(rows);
		in.read(reinterpret_cast<char *>(layer.bias.data()),
		        std::streamsize(layer.bias.size() * sizeof(float)));
		if (!in) {
			throw DataError("truncated model file " + path);
		}
		model.layers.push_back(std::move(layer));
	}
	model.duty_cycles.resize(model.pbit_count());
	in.read(reinterpret_cast<char *>(model.duty_cycles.data()),
	        std::streamsize(model.duty_cycles.size() * sizeof(float)));
	if (!in) {
		throw DataError("truncated model file " + path);
	}
	model.meta.learning_rate = read_pod<float>(in, path);
	model.meta.hidden_gain = read_pod<float>(in, path);
	model.meta.cd_epochs = static_cast<int>(read_pod<std::uint32_t>(in, path));
	model.meta.readout_epochs =
	    static_cast<int>(read_pod<std::uint32_t>(in, path));
	model.meta.batch = static_cast<int>(read_pod<std::uint32_t>(in, path));
	model.meta.seed = read_pod<std::uint64_t>(in, path);
	model.validate();
	return model;
}

double activation_voltage(const PbitParams &params, double pre_activation)
{
	const double v =
	    0.5 * params.vdd_volts + params.v_slope_volts * pre_activation;
	return std::clamp(v, 0.0, params.vdd_volts);
}

void InferenceConfig::validate(const DbnModel &model) const
{
	model.validate();
	policy.validate();
	if (population == nullptr ||
	    population->size() != model.pbit_count()) {
		throw DataError("population size must equal the p-bit count");
	}
	if (!rf_kohm.empty() && rf_kohm.size() != population->size()) {
		throw DataError("per-device feedback list has the wrong size");
	}
	if (votes < 1) {
		throw DataError("votes must be >= 1");
	}
}

Prediction infer_stochastic(const DbnModel &model, const float *image,
                            const InferenceConfig &cfg, std::uint64_t seed)
{
	cfg.validate(model);
	const std::size_t n_pbits = model.pbit_count();
	const int n_pairs = static_cast<int>(model.layers.size());

	// The magnetization state of each device persists through the whole
	// pass (all layers and votes). Before the image is presented the state
	// is whatever earlier activity left behind: a draw from the device's
	// long-run duty cycle, carrying no information about this image.
	std::vector<MagState> states(n_pbits);
	{
		Rng rng(derive_seed(seed, 0x57a7e));
		for (std::size_t k = 0; k < n_pbits; ++k) {
			states[k] = rng.bernoulli(model.duty_cycles[k]) ? MagState::AP
			                                                : MagState::P;
		}
	}

	// Input-layer pre-activations do not change across votes.
	const int first_out = model.topology[1];
	std::vector<float> first_pre(first_out);
	for (int j = 0; j < first_out; ++j) {
		first_pre[j] =
		    dot(model.layers[0].weight.row(j), image, model.topology[0]) +
		    model.layers[0].bias[j];
	}

	Prediction prediction;
	std::vector<float> prev;
	std::vector<float> next;
	for (int vote = 0; vote < cfg.votes; ++vote) {
		std::size_t base = 0;
		for (int l = 0; l < n_pairs; ++l) {
			const int n_out = model.topology[l + 1];
			next.assign(n_out, 0.0f);
			for (int j = 0; j < n_out; ++j) {
				const float pre =
				    l == 0 ? first_pre[j]
				           : dot(model.layers[l].weight.row(j), prev.data(),
				                 model.topology[l]) +
				                 model.layers[l].bias[j];
				PbitParams device = cfg.population->devices[base + j];
				if (!cfg.rf_kohm.empty()) {
					device.rf_kohm = cfg.rf_kohm[base + j];
				}
				const double v_in = activation_voltage(device, pre);
				Rng rng(derive_seed(seed, 1 + l, j,
				                    static_cast<std::uint64_t>(vote)));
				const double frac =
				    sample_hold(device, v_in, cfg.policy.settle_ns,
				                cfg.policy.tau_s_ns, states[base + j], rng);
				if (l == n_pairs - 1) {
					prediction.scores[j] += frac;
				}
				else {
					next[j] = static_cast<float>(frac);
				}
			}
			prev.swap(next);
			base += n_out;
		}
	}

	for (auto &score : prediction.scores) {
		score /= cfg.votes;
	}
	// Argmax with ties broken toward the lowest digit.
	for (int k = 1; k < 10; ++k) {
		if (prediction.scores[k] > prediction.scores[prediction.digit]) {
			prediction.digit = k;
		}
	}
	return prediction;
}

int infer_ideal(const DbnModel &model, const float *image)
{
	std::vector<double> prev(image, image + model.topology[0]);
	std::vector<double> next;
	for (std::size_t l = 0; l < model.layers.size(); ++l) {
		const int n_out = model.topology[l + 1];
		next.assign(n_out, 0.0);
		for (int j = 0; j < n_out; ++j) {
			const float *w = model.layers[l].weight.row(j);
			double acc = model.layers[l].bias[j];
			for (int i = 0; i < model.topology[l]; ++i) {
				acc += double(w[i]) * prev[i];
			}
			// The final layer is read through the (monotone) activation,
			// so ranking by pre-activation is equivalent.
			next[j] = l + 1 < model.layers.size()
			              ? 1.0 / (1.0 + std::exp(-acc))
			              : acc;
		}
		prev.swap(next);
	}
	int digit = 0;
	for (int k = 1; k < 10; ++k) {
		if (prev[k] > prev[digit]) {
			digit = k;
		}
	}
	return digit;
}

namespace {

EvalResult tally(const Dataset &data, const std::vector<int> &predictions)
{
	EvalResult result;
	result.count = data.size();
	std::size_t wrong = 0;
	for (std::size_t i = 0; i < data.size(); ++i) {
		const int truth = data.labels[i];
		result.confusion[truth][predictions[i]] += 1;
		if (predictions[i] != truth) {
			++wrong;
		}
	}
	result.error_rate = static_cast<double>(wrong) / data.size();
	return result;
}

}  // namespace

EvalResult evaluate(const DbnModel &model, const Dataset &data,
                    const InferenceConfig &cfg, std::uint64_t seed)
{
	if (data.size() == 0) {
		throw DataError("empty evaluation split");
	}
	cfg.validate(model);
	std::vector<int> predictions(data.size());
	parallel_for(data.size(), [&](std::size_t i) {
		predictions[i] =
		    infer_stochastic(model, data.image(i), cfg,
		                     derive_seed(seed, i))
		        .digit;
	});
	return tally(data, predictions);
}

EvalResult evaluate_ideal(const DbnModel &model, const Dataset &data)
{
	if (data.size() == 0) {
		throw DataError("empty evaluation split");
	}
	model.validate();
	std::vector<int> predictions(data.size());
	parallel_for(data.size(), [&](std::size_t i) {
		predictions[i] = infer_ideal(model, data.image(i));
	});
	return tally(data, predictions);
}

}  // namespace pbit
