#!/usr/bin/env python3
"""Reference values frozen into the unit tests.

Each quantity is evaluated directly from its defining formula with Python
floats and fractions, independently of the C++ sources. Rerun after changing a
formula and compare against the constants in tests/unit.
"""

import math
from fractions import Fraction


def depth_saliency(z, zn, zf):
    z = min(max(z, zn), zf)
    x = Fraction(255) * Fraction(zn) / Fraction(z) * (Fraction(zf) - Fraction(z)) / (Fraction(zf) - Fraction(zn))
    return math.floor(x + Fraction(1, 2))


def risk(d, v, t_safe, d_safe, alpha):
    temporal = 0.0 if v == 0 else max(0.0, v / d - 1.0 / t_safe)
    return temporal + alpha * max(0.0, 1.0 / d - 1.0 / d_safe)


def repulsion(r, gain):
    return 1.0 if r >= 1.0 / gain else gain * r


def total(attn):
    s = sum(abs(a) for a in attn)
    if s == 0:
        return 0.0
    return sum(abs(a) / s * a for a in attn)


def shape(a, deadband, limit):
    a = min(max(a, -1.0), 1.0)
    if abs(a) <= deadband:
        return 0.0
    return math.copysign((abs(a) - deadband) / (1.0 - deadband) * limit, a)


def memory_sequence(pattern, cr, decay, m0=0.0):
    m, out = m0, []
    for visible in pattern:
        m = m + cr * (1.0 - m) if visible else m * (1.0 - decay)
        out.append(m)
    return out


def main():
    print("depth_saliency")
    for z, zn, zf in [(0.5, 0.5, 10.0), (2.0, 0.5, 10.0), (10.0, 0.5, 10.0), (1.0, 0.3, 10.0),
                      (3.7, 0.3, 10.0), (0.1, 0.3, 10.0), (9.99, 0.3, 10.0)]:
        print(f"  z={z} zn={zn} zf={zf} -> {depth_saliency(z, zn, zf)}")

    print("risk / repulsion")
    print(f"  r(1,1;4,3,1) = {risk(1, 1, 4, 3, 1)!r}")
    print(f"  r(1,0;4,3,1) = {risk(1, 0, 4, 3, 1)!r}")
    print(f"  R(r=1.4167,G=2) = {repulsion(risk(1, 1, 4, 3, 1), 2)!r}")
    print(f"  R(r=0.2,G=2) = {repulsion(0.2, 2)!r}")
    print(f"  r(0.8,0.5;2,1.5,1) = {risk(0.8, 0.5, 2, 1.5, 1)!r}")
    print(f"  R(0.8,0.5;2,1.5,1,G=2) = {repulsion(risk(0.8, 0.5, 2, 1.5, 1), 2)!r}")
    print(f"  r(1.2,0.1;2,1.5,1) = {risk(1.2, 0.1, 2, 1.5, 1)!r}")
    print(f"  R(1.2,0.1;2,1.5,1,G=2) = {repulsion(risk(1.2, 0.1, 2, 1.5, 1), 2)!r}")

    print("total")
    print(f"  {{0.6,0.6}} -> {total([0.6, 0.6])!r}")
    print(f"  {{0.9,0.1}} -> {total([0.9, 0.1])!r}")
    print(f"  {{1,0.1}} gpf -> {total([1.0, 0.1])!r}, amgpf m2=1 g=1 -> {total([1.0, 0.0])!r}")

    print("attention rates")
    print(f"  {{30,70}} -> {[Fraction(30, 100), Fraction(70, 100)]}")

    print("memory")
    print(f"  decay 0.8, D=0.1, 3 ticks -> {memory_sequence([False] * 3, 0.0, 0.1, 0.8)[-1]!r}")
    print(f"  alternating cr=0.5 D=0.5 -> {memory_sequence([True, False, True, False], 0.5, 0.5)}")
    print(f"  visible cr=0.1 n=10 -> {1 - (1 - 0.1) ** 10!r}")

    print("shape_command")
    print(f"  0.5 deadband 0.1 -> {shape(0.5, 0.1, 1.0)!r}")
    print(f"  0.55 deadband 0.1 -> {shape(0.55, 0.1, 1.0)!r}")

    print("operator")
    v_max, omega_max, k_heading, cruise, k_approach = 1.0, 1.5, 2.0, 0.6, 1.0
    e = math.pi / 2
    dist = 3.0
    omega = k_heading * e
    v = min(cruise, k_approach * dist) * max(0.0, math.cos(e))
    print(f"  90 deg left: forward={max(-1, min(1, v / v_max))!r} angular={max(-1, min(1, omega / omega_max))!r}")

    print("metrics")
    dt, speed, ticks = 0.1, 0.5, 200
    print(f"  10 m run: time={ticks * dt!r} displacement={ticks * speed * dt!r} speed={ticks * speed * dt / (ticks * dt)!r}")

    print("step_robot")
    blend = min(1.0, 5.0 * 0.1)
    v1 = 0.0 + blend * (1.0 - 0.0)
    print(f"  from rest, cmd 1, dt 0.1, k 5: v={v1!r} x={v1 * 0.1!r}")


if __name__ == "__main__":
    main()
