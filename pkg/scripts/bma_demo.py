"""Generate a pitch sequence with the Grover-amplified Markov sequencer and
report how often each label followed each other label.

    python scripts/bma_demo.py --table data/twelve.json --start C --loops 200 --seed 3
"""
import argparse
from collections import Counter

from qac import bma


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--table", default="data/twelve.json")
    parser.add_argument("--start", default="C")
    parser.add_argument("--loops", type=int, default=64)
    parser.add_argument("--shots", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    table = bma.TransitionTable.load(args.table)
    config = bma.SequencerConfig(args.start, args.loops, shots=args.shots, seed=args.seed)
    events = bma.run_sequencer(table, config)

    print(" ".join(e.label for e in events))
    pairs = Counter(zip([args.start] + [e.label for e in events], [e.label for e in events]))
    print("\nfrom -> to: count")
    for (a, b), c in sorted(pairs.items(), key=lambda kv: (table.index(kv[0][0]), -kv[1])):
        print(f"{a:>3} -> {b:<3} {c}")
    illegal = [p for p in pairs if not table.matrix[table.index(p[0])][table.index(p[1])]]
    print(f"\n{len(events)} notes, {len(illegal)} transitions outside the table")


if __name__ == "__main__":
    main()
