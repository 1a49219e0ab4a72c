#!/usr/bin/env python3
# Copyright 2026 The efleaf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent numpy oracle for the reference-vs-grouped energy deviation.

Re-derives the mel Gabor init, the group plan, and both energy pipelines
with numpy only, then prints the relative RMS deviation per seed and plan.
The pinned tolerance in core/include/efleaf/harness.hpp was produced by
this script: the largest default-plan deviation over the noise seeds and
the bundled tone (data/tone_1s.wav), times 1.5, rounded up to 1e-3.

Noise inputs use numpy's generator, so the deviations printed here are not
bit-identical to the C++ harness runs; they agree to the first digit.
"""
import argparse
import math
import pathlib
import wave

import numpy as np

SR, N, FMIN, FMAX, WIN, HOP = 16000, 40, 60.0, 7800.0, 401, 160


def mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def hz(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def init_bank():
    peaks = hz(np.linspace(mel(FMIN), mel(FMAX), N + 2))
    nu = peaks[1:-1] * 2 * np.pi / SR
    sigma = (SR / 2.0) / (peaks[2:] - peaks[:-2])
    return nu, sigma, np.full(N, 0.4)


def filter_size(sigma, b):
    c = int(math.floor(b * sigma + 0.5))
    if c % 2 == 0:
        c += 1
    return min(max(c, 3), WIN)


def filter_stride(nu, d):
    limit = d * math.pi / nu
    return max([k for k in range(1, HOP + 1) if HOP % k == 0 and k <= limit] or [1])


def plan(nu, sigma, b, d, g, rule="lowest"):
    groups, lo = [], 0
    base, extra = divmod(N, g)
    for gi in range(g):
        hi = lo + base + (1 if gi < extra else 0)
        k = max(filter_size(s, b) for s in sigma[lo:hi])
        strides = [filter_stride(v, d) for v in nu[lo:hi]]
        stride = strides[int(np.argmin(nu[lo:hi]))] if rule == "lowest" else min(strides)
        pool = math.ceil(WIN / stride)
        pool += 1 - pool % 2
        groups.append((lo, hi, k, stride, pool, HOP // stride))
        lo = hi
    return groups


def gabor(nu, sigma, size):
    t = np.arange(size) - (size - 1) / 2
    env = np.exp(-t ** 2 / (2 * sigma ** 2)) / (math.sqrt(2 * math.pi) * sigma)
    return env * np.exp(1j * nu * t)


def gauss(sp, size, stride):
    st = sp * (WIN - 1) / 2 / stride
    t = np.arange(size) - (size - 1) / 2
    return np.exp(-t ** 2 / (2 * st ** 2)) / (math.sqrt(2 * math.pi) * st)


def correlate_same(x, k, stride):
    pad = (len(k) - 1) // 2
    xp = np.concatenate([np.zeros(pad, x.dtype), x, np.zeros(pad, x.dtype)])
    full = np.correlate(xp, k, mode="valid") if not np.iscomplexobj(k) else (
        np.correlate(xp, k.real, mode="valid") + 1j * np.correlate(xp, k.imag, mode="valid"))
    return full[::stride][: -(-len(x) // stride)]


def energy(x, nu, sigma, sp, geometry):
    out = []
    for i in range(N):
        k, cs, p, ps = geometry[i]
        z = correlate_same(x, gabor(nu[i], sigma[i], k), cs)
        e = z.real ** 2 + z.imag ** 2
        out.append(correlate_same(e, gauss(sp[i], p, cs), ps))
    return np.array(out)


def geometry_of(groups):
    geo = [None] * N
    for lo, hi, k, cs, p, ps in groups:
        for i in range(lo, hi):
            geo[i] = (k, cs, p, ps)
    return geo


def rel_rms(a, b):
    margin = -(-(WIN - 1) // HOP)
    a, b = a[:, margin:-margin], b[:, margin:-margin]
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--tone", default=str(pathlib.Path(__file__).parent.parent / "data" / "tone_1s.wav"))
    args = ap.parse_args()
    nu, sigma, sp = init_bank()
    for i in (0, 25, 39):
        print("filter", i, [g for g in plan(nu, sigma, 4.75, 1, 4) if g[0] <= i < g[1]])
    ref = [(WIN, 1, WIN, HOP)] * N
    worst = 0.0
    for seed in range(args.seeds):
        x = np.random.default_rng(seed).standard_normal(SR) * 0.1
        a = energy(x, nu, sigma, sp, ref)
        row = []
        for b, d, g in ((4.75, 1, 4), (6, 1, 4), (2, 1, 4), (2, 16, 8), (6, 16, 8)):
            e = rel_rms(a, energy(x, nu, sigma, sp, geometry_of(plan(nu, sigma, b, d, g))))
            row.append(e)
        worst = max(worst, row[0])
        print(f"seed {seed}: b4.75={row[0]:.5f} b6={row[1]:.5f} b2={row[2]:.5f} "
              f"aggr(b2,d16,g8)={row[3]:.5f} opt(b6,d16,g8)={row[4]:.5f}")
    with wave.open(args.tone, "rb") as w:
        x = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2") / 32768.0
    tone = rel_rms(energy(x, nu, sigma, sp, ref),
                   energy(x, nu, sigma, sp, geometry_of(plan(nu, sigma, 4.75, 1, 4))))
    print(f"tone: b4.75={tone:.5f}")
    worst = max(worst, tone)
    print(f"max default-plan deviation {worst:.5f}; tolerance {math.ceil(worst * 1.5 * 1000) / 1000:.3f}")


if __name__ == "__main__":
    main()
