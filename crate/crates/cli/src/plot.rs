//! Stand-alone matplotlib scripts for the CSV outputs.

pub fn sweep_power(csv: &str) -> String {
    format!(
        r#"import csv
import matplotlib.pyplot as plt

series = {{}}
with open({csv:?}) as f:
    for row in csv.DictReader(f):
        series.setdefault(row["scheme"], []).append((float(row["axis"]), float(row["mean_metric"])))

for scheme, points in series.items():
    points.sort()
    plt.semilogy([p[0] for p in points], [p[1] for p in points], marker="o", label=scheme)
plt.xlabel("number of antennas N")
plt.ylabel("mean transmit power (W)")
plt.legend()
plt.grid(True, which="both")
plt.savefig({png:?}, dpi=150)
"#,
        png = csv.replace(".csv", ".png")
    )
}

pub fn sweep_rate(csv: &str) -> String {
    format!(
        r#"import csv
import math
import matplotlib.pyplot as plt

series = {{}}
with open({csv:?}) as f:
    for row in csv.DictReader(f):
        watts = float(row["axis"])
        dbm = 10 * math.log10(watts) + 30 if watts > 0 else float("-inf")
        series.setdefault(row["scheme"], []).append((dbm, float(row["mean_metric"])))

for scheme, points in series.items():
    points.sort()
    plt.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=scheme)
plt.xlabel("transmit power budget (dBm)")
plt.ylabel("mean secrecy rate (bits/s/Hz)")
plt.legend()
plt.grid(True)
plt.savefig({png:?}, dpi=150)
"#,
        png = csv.replace(".csv", ".png")
    )
}

pub fn convergence(csv: &str) -> String {
    format!(
        r#"import csv
import matplotlib.pyplot as plt

series = {{}}
with open({csv:?}) as f:
    for row in csv.DictReader(f):
        series.setdefault(int(row["elements"]), []).append((int(row["iteration"]), float(row["mean_g"])))

for n, points in sorted(series.items()):
    plt.semilogy([p[0] for p in points], [p[1] for p in points], marker="o", label=f"N = {{n}}")
plt.xlabel("outer iteration")
plt.ylabel("mean g(f)")
plt.legend()
plt.grid(True, which="both")
plt.savefig({png:?}, dpi=150)
"#,
        png = csv.replace(".csv", ".png")
    )
}

pub fn convergence_single(csv: &str) -> String {
    format!(
        r#"import csv
import matplotlib.pyplot as plt

with open({csv:?}) as f:
    rows = [(int(r["iteration"]), float(r["g"])) for r in csv.DictReader(f)]

plt.semilogy([r[0] for r in rows], [r[1] for r in rows], marker="o")
plt.xlabel("outer iteration")
plt.ylabel("g(f)")
plt.grid(True, which="both")
plt.savefig({png:?}, dpi=150)
"#,
        png = csv.replace(".csv", ".png")
    )
}
