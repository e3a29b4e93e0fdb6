"""Trigger the superposition knob repeatedly and show the histogram of its
quantized targets plus one interpolated ramp.

    python scripts/superposition_demo.py --qubits 3 --triggers 400 --ramp 120
"""
import argparse
from collections import Counter

from qac import control


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--qubits", type=int, default=3)
    parser.add_argument("--triggers", type=int, default=400)
    parser.add_argument("--ramp", type=int, default=120)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    device = control.SuperpositionDevice(args.qubits, ramp_ms=args.ramp, seed=args.seed)
    hist = Counter()
    for _ in range(args.triggers):
        _, value = control.trigger_superposition(device)
        control.step_interpolation(device, args.ramp)
        hist[value] += 1
    for value in sorted(hist):
        print(f"{value:.4f} {'#' * hist[value]}")

    start = device.current_value
    _, target = control.trigger_superposition(device)
    print(f"\nramp from {start:.4f} to {target:.4f}:")
    for t in range(0, args.ramp + 1, max(1, args.ramp // 6)):
        print(f"  t={t:>4} ms  value={control.step_interpolation(device, t):.4f}")


if __name__ == "__main__":
    main()
