"""Tour of the command-line interface.

Creates a model file and an instance CSV in a scratch directory, then runs
every subcommand in-process and shows the exit codes and reports.

Run: python demos/04_cli_tour.py
"""
import csv
import tempfile
from pathlib import Path

from dualcert import predict, random_inputs, random_network, save_network
from dualcert.cli import main as dualcert_cli


def run(argv):
    print(f"\n$ dualcert {' '.join(argv)}")
    code = dualcert_cli(argv)
    print(f"(exit code {code})")


def main():
    scratch = Path(tempfile.mkdtemp(prefix="dualcert-demo-"))
    net = random_network(seed=5, input_dim=10, hidden_widths=[8, 6], output_dim=3,
                         activation="arctan")
    model = scratch / "model.json"
    save_network(net, model)
    data = scratch / "instances.csv"
    with open(data, "w", newline="") as fh:
        csv.writer(fh).writerows([[predict(net, x), *x] for x in random_inputs(6, net, 3)])
    print(f"scratch dir: {scratch}")

    run(["verify", "--model", str(model), "--input", str(data), "--index", "0",
         "--eps", "0.05", "--samples", "500"])
    run(["certify", "--model", str(model), "--input", str(data), "--count", "2",
         "--samples", "300", "--eps-max", "0.5", "--format", "md"])
    run(["bounds", "--model", str(model), "--input", str(data), "--index", "0",
         "--eps", "0.05", "--samples", "300", "--format", "csv"])
    run(["compare", "--model", str(model), "--input", str(data), "--count", "2",
         "--strategies", "single,dual-sample,dual-grad", "--samples", "300",
         "--eps-max", "0.5", "--format", "md"])


if __name__ == "__main__":
    main()
