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

"""Writes data/tone_1s.wav: one second of 16 kHz mono PCM16.

Three equal partials at 250, 1000 and 4000 Hz (peak 0.6) under a 10 ms
raised-cosine fade at each end.
"""

import math
import struct
import sys
import wave

RATE = 16000
PARTIALS = (250.0, 1000.0, 4000.0)


def main(path):
    n = RATE
    fade = RATE // 100
    frames = bytearray()
    for i in range(n):
        t = i / RATE
        v = sum(math.sin(2 * math.pi * f * t) for f in PARTIALS) * 0.2
        edge = min(i, n - 1 - i)
        if edge < fade:
            v *= 0.5 - 0.5 * math.cos(math.pi * edge / fade)
        frames += struct.pack("<h", max(-32768, min(32767, round(v * 32768))))
    with wave.open(path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(RATE)
        w.writeframes(bytes(frames))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/tone_1s.wav")
