"""Physical-layer model: channels, OFDM source symbol, tag gating, reader input.

One frame spans N+C samples: a cyclic prefix of length C followed by the
N-sample effective OFDM symbol, so s(n) = s(n+N) for n in [0, C-1]. Three
FIR multipath channels connect the nodes: h (source -> reader, L+1 taps),
g (source -> tag, M+1 taps), f (tag -> reader, K+1 taps). The tag conveys
one bit per frame by switching its antenna impedance: reflect (gate 1) or
absorb (gate 0). The gate is restricted to n in [Q, C-K-1] with
Q = max(L, M, K), which keeps the backscatter entirely inside the CP. The
reader sees

    y(n) = sum_l h_l s(n-l) + eta * sum_k f_k B(n-k) x(n-k) + w(n)

with x(n) = sum_m g_m s(n-m) the signal at the tag antenna, eta the complex
attenuation inside the tag, and w(n) ~ CN(0, Nw).

Because the gate only touches the CP, a legacy OFDM receiver (which drops
the CP) is unaffected by the tag no matter what bit is sent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_generator, complex_gaussian

_SNR_MODES = ("direct-gamma", "from-Ps")
_DOF_CONVENTIONS = ("paper", "complex")
_THRESHOLD_MODES = ("closed-form", "exact-root")
_GAMMA_KNOWLEDGE = ("genie", "ensemble")


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of the link and the experiment defaults.

    N: effective OFDM symbol length (samples)
    C: cyclic prefix length (samples)
    L, M, K: channel orders (tap counts L+1, M+1, K+1)
    eta: complex attenuation inside the tag
    Ps: source sample variance (used directly in from-Ps mode)
    Nw: AWGN variance at the reader
    W: number of DFT bins averaged into one test statistic
    trials: default Monte Carlo trial count per sweep point
    seed: master seed for all derived random streams
    snr_mode: "direct-gamma" rescales Ps per trial so the realized detection
        SNR equals 10^(gamma_db/10); "from-Ps" uses Ps as given and lets the
        per-trial SNR float with the channel draw
    gamma_db: target detection SNR in dB (direct-gamma mode)
    dof_convention: "paper" models the statistic as chi-square with W dof;
        "complex" uses the statistically exact 2W-dof scaling
    threshold_mode: "closed-form" or "exact-root" detection threshold
    gamma_knowledge: "genie" computes the per-trial SNR from the drawn taps,
        "ensemble" substitutes the channel-averaged tap energies
    """

    N: int = 2048
    C: int = 256
    L: int = 5
    M: int = 5
    K: int = 5
    eta: complex = 0.5 + 0j
    Ps: float = 1.0
    Nw: float = 1.0
    W: int = 12
    trials: int = 100_000
    seed: int = 1
    snr_mode: str = "direct-gamma"
    gamma_db: float = 13.0
    dof_convention: str = "paper"
    threshold_mode: str = "closed-form"
    gamma_knowledge: str = "genie"

    def __post_init__(self):
        if min(self.L, self.M, self.K) < 0:
            raise ValueError("channel orders L, M, K must be >= 0")
        q = max(self.L, self.M, self.K)
        if self.C <= q + self.K + 1:
            raise ValueError(
                f"CP too short: need C > Q+K+1 = {q + self.K + 1}, got C={self.C}"
            )
        if self.N < self.C:
            raise ValueError(f"need N >= C, got N={self.N}, C={self.C}")
        if self.W < 1 or self.W > self.R + 1:
            raise ValueError(f"need 1 <= W <= R+1 = {self.R + 1}, got W={self.W}")
        if not self.Ps > 0:
            raise ValueError(f"Ps must be > 0, got {self.Ps}")
        if self.Nw < 0:
            raise ValueError(f"Nw must be >= 0, got {self.Nw}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.snr_mode not in _SNR_MODES:
            raise ValueError(f"snr_mode must be one of {_SNR_MODES}")
        if self.dof_convention not in _DOF_CONVENTIONS:
            raise ValueError(f"dof_convention must be one of {_DOF_CONVENTIONS}")
        if self.threshold_mode not in _THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {_THRESHOLD_MODES}")
        if self.gamma_knowledge not in _GAMMA_KNOWLEDGE:
            raise ValueError(f"gamma_knowledge must be one of {_GAMMA_KNOWLEDGE}")

    @property
    def Q(self) -> int:
        return max(self.L, self.M, self.K)

    @property
    def T(self) -> int:
        """Post-cancellation block order: T = C - Q - 1."""
        return self.C - self.Q - 1

    @property
    def R(self) -> int:
        """Folded block order: R = C - Q - K - 1."""
        return self.C - self.Q - self.K - 1

    @property
    def frame_len(self) -> int:
        return self.N + self.C


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization of the three multipath channels."""

    h: np.ndarray
    g: np.ndarray
    f: np.ndarray

    @property
    def Q(self) -> int:
        return max(len(self.h), len(self.g), len(self.f)) - 1

    @property
    def sum_g2(self) -> float:
        return float(np.sum(np.abs(self.g) ** 2))

    @property
    def sum_f2(self) -> float:
        return float(np.sum(np.abs(self.f) ** 2))


@dataclass(eq=False)
class Frame:
    """One OFDM symbol period of the simulated link.

    noise keeps the drawn AWGN realization so diagnostic code can split the
    reader observation into signal and noise parts after the fact.
    """

    s: np.ndarray
    x: np.ndarray
    gate: np.ndarray
    y: np.ndarray
    bit: int
    noise: np.ndarray | None = None


@dataclass(eq=False)
class FrameHistory:
    """Cross-frame convolution tails (previous frame's trailing samples)."""

    s_tail: np.ndarray
    gx_tail: np.ndarray

    @classmethod
    def from_frame(cls, frame: Frame, config: SystemConfig) -> "FrameHistory":
        q = config.Q
        gx = frame.gate * frame.x
        if q == 0:
            return cls(np.zeros(0, np.complex128), np.zeros(0, np.complex128))
        return cls(frame.s[-q:].copy(), gx[-q:].copy())


def _causal_fir(signal: np.ndarray, taps: np.ndarray, tail=None) -> np.ndarray:
    """y(n) = sum_m taps[m] * signal(n-m), with signal(n<0) from tail (or 0)."""
    taps = np.asarray(taps, dtype=np.complex128)
    signal = np.asarray(signal, dtype=np.complex128)
    k = len(taps) - 1
    if k == 0:
        return taps[0] * signal
    pad = np.zeros(k, dtype=np.complex128)
    if tail is not None:
        tail = np.asarray(tail, dtype=np.complex128)
        take = min(k, len(tail))
        if take:
            pad[k - take :] = tail[-take:]
    ext = np.concatenate([pad, signal])
    return np.convolve(ext, taps)[k : k + len(signal)]


def draw_channels(config: SystemConfig, rng) -> ChannelSet:
    """Draw i.i.d. CN(0, 1) taps for all three channels (order: h, g, f)."""
    gen = as_generator(rng)
    h = complex_gaussian(gen, 1.0, config.L + 1)
    g = complex_gaussian(gen, 1.0, config.M + 1)
    f = complex_gaussian(gen, 1.0, config.K + 1)
    return ChannelSet(h=h, g=g, f=f)


def generate_source_symbol(config: SystemConfig, rng) -> np.ndarray:
    """One OFDM symbol with CP: N i.i.d. CN(0, Ps) samples, last C copied in front."""
    gen = as_generator(rng)
    body = complex_gaussian(gen, config.Ps, config.N)
    return np.concatenate([body[config.N - config.C :], body])


def tag_gate(config: SystemConfig, bit: int) -> np.ndarray:
    """Reflection control waveform: bit on n in [Q, C-K-1], zero elsewhere."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    gate = np.zeros(config.frame_len, dtype=np.int8)
    if bit:
        gate[config.Q : config.C - config.K] = 1
    return gate


def tag_receive(s: np.ndarray, g: np.ndarray, history=None) -> np.ndarray:
    """Signal at the tag antenna: causal FIR of the source through g.

    history supplies the previous frame's trailing source samples for the
    n < 0 convolution terms; None means a cold start (zeros).
    """
    tail = history.s_tail if isinstance(history, FrameHistory) else history
    return _causal_fir(s, g, tail)


def observe_components(s, x, gate, channels: ChannelSet, config: SystemConfig,
                       history: FrameHistory | None = None):
    """Noise-free reader components: (direct source path, backscatter path)."""
    if not (len(s) == len(x) == len(gate) == config.frame_len):
        raise ValueError("stream lengths must all equal N+C")
    s_tail = history.s_tail if history is not None else None
    gx_tail = history.gx_tail if history is not None else None
    direct = _causal_fir(s, channels.h, s_tail)
    backscatter = config.eta * _causal_fir(gate * x, channels.f, gx_tail)
    return direct, backscatter


def observe(s, x, gate, channels: ChannelSet, config: SystemConfig, rng,
            history: FrameHistory | None = None) -> np.ndarray:
    """Reader observation: direct path + backscatter + CN(0, Nw) noise."""
    direct, backscatter = observe_components(s, x, gate, channels, config, history)
    noise = complex_gaussian(rng, config.Nw, config.frame_len)
    return direct + backscatter + noise


def simulate_frame(config: SystemConfig, channels: ChannelSet, bit: int, rng,
                   history: FrameHistory | None = None) -> Frame:
    """Build one complete frame, keeping the noise realization for diagnostics.

    Draw order on the stream: source symbol, then reader noise.
    """
    gen = as_generator(rng)
    s = generate_source_symbol(config, gen)
    x = tag_receive(s, channels.g, history)
    gate = tag_gate(config, bit)
    direct, backscatter = observe_components(s, x, gate, channels, config, history)
    noise = complex_gaussian(gen, config.Nw, config.frame_len)
    return Frame(s=s, x=x, gate=gate, y=direct + backscatter + noise,
                 bit=bit, noise=noise)


def legacy_demodulate(y_clean: np.ndarray, config: SystemConfig) -> np.ndarray:
    """What a legacy OFDM receiver computes: drop the CP, DFT the rest."""
    if len(y_clean) != config.frame_len:
        raise ValueError(f"expected {config.frame_len} samples, got {len(y_clean)}")
    return np.fft.fft(np.asarray(y_clean[config.C :], dtype=np.complex128))
