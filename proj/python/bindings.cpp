#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ahpc/codec.hpp"
#include "ahpc/errors.hpp"
#include "ahpc/lpc.hpp"
#include "ahpc/mlp.hpp"
#include "ahpc/predictor.hpp"
#include "ahpc/quant.hpp"
#include "ahpc/signal.hpp"
#include "ahpc/synth.hpp"

namespace py = pybind11;
using namespace ahpc;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const DoubleArray& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive hybrid-predictor ADPCM speech codec";

    py::register_exception<Error>(m, "AhpcError");

    py::enum_<PcmFormat>(m, "PcmFormat")
        .value("raw16le", PcmFormat::raw16le)
        .value("wav", PcmFormat::wav);
    py::enum_<Mode>(m, "Mode")
        .value("backward", Mode::backward)
        .value("forward", Mode::forward);
    py::enum_<PredictorKind>(m, "PredictorKind")
        .value("lpc_only", PredictorKind::lpc_only)
        .value("mlp_only", PredictorKind::mlp_only)
        .value("hybrid", PredictorKind::hybrid);

    py::class_<SignalBuffer>(m, "SignalBuffer")
        .def(py::init([](DoubleArray samples, int rate, int depth) {
                 SignalBuffer s;
                 s.samples = to_vec(samples);
                 s.sample_rate_hz = rate;
                 s.source_bit_depth = depth;
                 return s;
             }),
             py::arg("samples"), py::arg("sample_rate_hz") = 8000,
             py::arg("source_bit_depth") = 12)
        .def_property_readonly("samples",
                               [](const SignalBuffer& s) { return to_array(s.samples); })
        .def_readwrite("sample_rate_hz", &SignalBuffer::sample_rate_hz)
        .def_readwrite("source_bit_depth", &SignalBuffer::source_bit_depth)
        .def("__len__", [](const SignalBuffer& s) { return s.samples.size(); });

    m.def("load_pcm", &load_pcm, py::arg("path"), py::arg("format"), py::arg("bit_depth") = 0);
    m.def("save_pcm", &save_pcm, py::arg("signal"), py::arg("path"), py::arg("format"));

    py::class_<SegSnrReport>(m, "SegSnrReport")
        .def_readonly("segsnr_db", &SegSnrReport::segsnr_db)
        .def_readonly("std_db", &SegSnrReport::std_db)
        .def_readonly("segment_count", &SegSnrReport::segment_count)
        .def_readonly("segment_len", &SegSnrReport::segment_len)
        .def("__repr__", [](const SegSnrReport& r) {
            return "SegSnrReport(" + std::to_string(r.segsnr_db) + " dB, std " +
                   std::to_string(r.std_db) + ", " + std::to_string(r.segment_count) + " segments)";
        });

    m.def(
        "segsnr",
        [](DoubleArray x, DoubleArray y, std::size_t segment_len, std::pair<double, double> clamp) {
            return segsnr(to_vec(x), to_vec(y), segment_len, clamp);
        },
        py::arg("original"), py::arg("decoded"), py::arg("segment_len") = 200,
        py::arg("clamp_db") = std::pair<double, double>(0.0, 80.0));

    // synthetic signals
    m.def(
        "synth_noise", [](std::size_t n, std::uint64_t seed) { return to_array(synth::white_noise(n, seed)); },
        py::arg("n"), py::arg("seed"));
    m.def(
        "synth_ar", [](std::size_t n, std::uint64_t seed) { return to_array(synth::speech_like_ar(n, seed)); },
        py::arg("n"), py::arg("seed"));
    m.def(
        "synth_saturated_ar",
        [](std::size_t n, std::uint64_t seed, double gain, double noise_rms) {
            return to_array(synth::saturated_ar(n, seed, gain, noise_rms));
        },
        py::arg("n"), py::arg("seed"), py::arg("gain") = 3.0, py::arg("noise_rms") = 0.35);
    m.def(
        "synth_voiced",
        [](std::size_t n, std::uint64_t seed, double pitch_hz) {
            return to_array(synth::voiced(n, seed, pitch_hz));
        },
        py::arg("n"), py::arg("seed"), py::arg("pitch_hz") = 110.0);

    // linear prediction
    py::class_<LpcModel>(m, "LpcModel")
        .def_readonly("order", &LpcModel::order)
        .def_property_readonly("coeffs", [](const LpcModel& m2) { return to_array(m2.coeffs); })
        .def_property_readonly("reflection",
                               [](const LpcModel& m2) { return to_array(m2.reflection); })
        .def_readonly("residual_energy", &LpcModel::residual_energy)
        .def_static("zero", &LpcModel::zero, py::arg("order"));

    m.def(
        "autocorrelation",
        [](DoubleArray frame, int max_lag) { return to_array(autocorrelation(to_vec(frame), max_lag)); },
        py::arg("frame"), py::arg("max_lag"));
    m.def(
        "levinson_durbin",
        [](DoubleArray r, int order) -> py::object {
            const auto model = levinson_durbin(to_vec(r), order);
            return model ? py::cast(*model) : py::none();
        },
        py::arg("autocorr"), py::arg("order"));
    m.def(
        "lpc_predict",
        [](const LpcModel& model, DoubleArray history) { return lpc_predict(model, to_vec(history)); },
        py::arg("model"), py::arg("history"));

    // perceptron predictor
    py::class_<MlpModel>(m, "MlpModel")
        .def(py::init<>())
        .def_property(
            "params", [](const MlpModel& m2) {
                return to_array(std::vector<double>(m2.p.begin(), m2.p.end()));
            },
            [](MlpModel& m2, DoubleArray params) {
                if (params.size() != kMlpParams) throw py::value_error("want 25 parameters");
                std::copy(params.data(), params.data() + kMlpParams, m2.p.begin());
            });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("n_starts", &TrainConfig::n_starts)
        .def_readwrite("lambda_init", &TrainConfig::lambda_init)
        .def_readwrite("lambda_up", &TrainConfig::lambda_up)
        .def_readwrite("lambda_down", &TrainConfig::lambda_down)
        .def_readwrite("lambda_max", &TrainConfig::lambda_max)
        .def_readwrite("max_retries", &TrainConfig::max_retries)
        .def_readwrite("init_scale", &TrainConfig::init_scale)
        .def_readwrite("seed", &TrainConfig::seed);

    m.def(
        "mlp_forward",
        [](const MlpModel& model, DoubleArray input) { return mlp_forward(model, to_vec(input)); },
        py::arg("model"), py::arg("input"));
    m.def(
        "multistart_train",
        [](DoubleArray context, DoubleArray frame, const TrainConfig& cfg,
           std::uint64_t frame_index, bool parallel) -> py::object {
            const auto out = multistart_train(to_vec(context), to_vec(frame), cfg, frame_index,
                                              parallel);
            if (!out) return py::none();
            return py::make_tuple(out->model, out->gain_db, out->mse, out->start_index);
        },
        py::arg("context"), py::arg("frame"), py::arg("config"), py::arg("frame_index") = 0,
        py::arg("parallel") = false);
    m.def(
        "prediction_gain",
        [](const LpcModel& model, DoubleArray frame, DoubleArray history) {
            return prediction_gain(LpcPredictor{&model}, to_vec(frame), to_vec(history));
        },
        py::arg("model"), py::arg("frame"), py::arg("history"));
    m.def(
        "prediction_gain",
        [](const MlpModel& model, DoubleArray frame, DoubleArray history) {
            return prediction_gain(MlpPredictor{&model}, to_vec(frame), to_vec(history));
        },
        py::arg("model"), py::arg("frame"), py::arg("history"));

    // adaptive quantizer
    py::class_<QuantState>(m, "QuantState")
        .def_readwrite("nq", &QuantState::nq)
        .def_readwrite("step", &QuantState::step)
        .def_readwrite("step_min", &QuantState::step_min)
        .def_readwrite("step_max", &QuantState::step_max)
        .def_readwrite("multipliers", &QuantState::multipliers);
    py::class_<Code>(m, "Code")
        .def(py::init([](int sign, int magnitude) { return Code{sign, magnitude}; }),
             py::arg("sign"), py::arg("magnitude"))
        .def_readonly("sign", &Code::sign)
        .def_readonly("magnitude", &Code::magnitude);
    m.def("default_quant_state", &default_quant_state, py::arg("nq"));
    m.def("quantize", &quantize, py::arg("e"), py::arg("state"));
    m.def("dequantize", &dequantize, py::arg("code"), py::arg("state"));
    m.def("adapt", &adapt, py::arg("state"), py::arg("code"));

    // codec
    py::class_<CodecConfig>(m, "CodecConfig")
        .def(py::init<>())
        .def_readwrite("mode", &CodecConfig::mode)
        .def_readwrite("predictor", &CodecConfig::predictor)
        .def_readwrite("lpc_order", &CodecConfig::lpc_order)
        .def_readwrite("frame_len", &CodecConfig::frame_len)
        .def_property(
            "nq", [](const CodecConfig& c) { return c.nq; },
            [](CodecConfig& c, int nq) {
                c.nq = nq;
                c.quant = default_quant_state(nq);
            })
        .def_readwrite("quant", &CodecConfig::quant)
        .def_readwrite("train", &CodecConfig::train)
        .def_readwrite("seed", &CodecConfig::seed)
        .def_readwrite("parallel_starts", &CodecConfig::parallel_starts);

    py::class_<StreamHeader>(m, "StreamHeader")
        .def_readonly("version", &StreamHeader::version)
        .def_readonly("mode", &StreamHeader::mode)
        .def_readonly("predictor", &StreamHeader::predictor)
        .def_readonly("nq", &StreamHeader::nq)
        .def_readonly("lpc_order", &StreamHeader::lpc_order)
        .def_readonly("frame_len", &StreamHeader::frame_len)
        .def_readonly("seed", &StreamHeader::seed)
        .def_readonly("sample_count", &StreamHeader::sample_count)
        .def_readonly("source_bit_depth", &StreamHeader::source_bit_depth)
        .def_readonly("tunables_digest", &StreamHeader::tunables_digest);

    m.def(
        "encode",
        [](DoubleArray samples, const CodecConfig& cfg) {
            SignalBuffer s;
            s.samples = to_vec(samples);
            const EncodeResult out = encode(s, cfg);
            const auto bytes = out.stream.serialize();
            py::dict d;
            d["stream"] = py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
            d["reconstruction"] = to_array(out.reconstruction);
            d["mlp_usage"] = out.mlp_usage;
            d["bits_per_sample"] = out.bits_per_sample;
            return d;
        },
        py::arg("samples"), py::arg("config"));

    m.def(
        "decode",
        [](py::bytes stream, py::object config) {
            const std::string raw = stream;
            const EncodedStream s = EncodedStream::parse(std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
            const DecodeResult out =
                config.is_none() ? decode(s) : decode(s, config.cast<CodecConfig>());
            py::dict d;
            d["samples"] = to_array(out.signal.samples);
            d["header"] = py::cast(out.header);
            return d;
        },
        py::arg("stream"), py::arg("config") = py::none());

    m.def("tunables_digest", &tunables_digest, py::arg("quant"), py::arg("train"));
}
