"""Adaptive hybrid-predictor ADPCM speech codec.

Thin wrapper over the C++ core: waveform I/O, LPC-10/25 and MLP 10x2x1
prediction, the adaptive quantizer, the closed-loop codec, and SEGSNR
evaluation.
"""

from ._core import (
    AhpcError,
    Code,
    CodecConfig,
    LpcModel,
    MlpModel,
    Mode,
    PcmFormat,
    PredictorKind,
    QuantState,
    SegSnrReport,
    SignalBuffer,
    StreamHeader,
    TrainConfig,
    adapt,
    autocorrelation,
    decode,
    default_quant_state,
    dequantize,
    encode,
    levinson_durbin,
    load_pcm,
    lpc_predict,
    mlp_forward,
    multistart_train,
    prediction_gain,
    quantize,
    save_pcm,
    segsnr,
    synth_ar,
    synth_noise,
    synth_saturated_ar,
    synth_voiced,
    tunables_digest,
)

__all__ = [
    "AhpcError",
    "Code",
    "CodecConfig",
    "LpcModel",
    "MlpModel",
    "Mode",
    "PcmFormat",
    "PredictorKind",
    "QuantState",
    "SegSnrReport",
    "SignalBuffer",
    "StreamHeader",
    "TrainConfig",
    "adapt",
    "autocorrelation",
    "decode",
    "default_quant_state",
    "dequantize",
    "encode",
    "levinson_durbin",
    "load_pcm",
    "lpc_predict",
    "mlp_forward",
    "multistart_train",
    "prediction_gain",
    "quantize",
    "save_pcm",
    "segsnr",
    "synth_ar",
    "synth_noise",
    "synth_saturated_ar",
    "synth_voiced",
    "tunables_digest",
]

__version__ = "0.1.0"
