"""
CSV, JSON and SVG emission for traces and sweep tables.

Floats are written with 17 significant digits so a replayed run produces a
byte-identical file. SVGs are rendered at a fixed 800x600 size with a fixed
hash salt and no date stamp for the same reason.
"""

import csv
import logging
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from errors import ConfigurationError

logger = logging.getLogger(__name__)

FIGSIZE = (8, 6)
DPI = 100

plt.rcParams["svg.hashsalt"] = "mirror-reparam"


def format_value(value):
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


class ReportService:
    @staticmethod
    def write_csv(path, header, rows):
        """
        Write a comma-separated table with a header row

        Args:
            path: Output file
            header: Column names
            rows: Iterable of rows matching the header

        Returns:
            str: The path written
        """
        _ensure_parent(path)
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ConfigurationError(f"Row width {len(row)} does not match header width {len(header)}")
                writer.writerow([format_value(v) for v in row])
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def read_csv(path):
        """Header and float columns of a CSV written by write_csv"""
        if not os.path.isfile(path):
            raise ConfigurationError(f"CSV not found: {path}")
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None:
                raise ConfigurationError(f"CSV is empty: {path}")
            columns = {name: [] for name in header}
            for row in reader:
                for name, cell in zip(header, row):
                    try:
                        columns[name].append(float(cell) if cell != "" else float("nan"))
                    except ValueError:
                        columns[name].append(float("nan"))
        return header, columns

    @staticmethod
    def write_json(path, model):
        _ensure_parent(path)
        with open(path, "w") as handle:
            handle.write(model.model_dump_json(indent=2))
            handle.write("\n")
        return path

    @staticmethod
    def write_trace(trace, path):
        """Trace schema t,loss,grad_norm,perturb_norm,x_0..x_{d-1}[,u_0..u_{d-1}]"""
        return ReportService.write_csv(path, trace.header(), trace.rows())

    @staticmethod
    def write_regret_sweep(result, path):
        header = ["T", "eta", "seed", "regret", "comparator", "certificate"]
        rows = [[r.T, r.eta, r.seed, r.regret, r.comparator, r.certificate] for r in result.rows]
        return ReportService.write_csv(path, header, rows)

    @staticmethod
    def write_closeness(result, path):
        rows = [[r.eta, r.max_distance] for r in result.rows]
        return ReportService.write_csv(path, ["eta", "max_distance"], rows)

    @staticmethod
    def write_perturbation_sweep(result, path):
        header = ["rule", "T", "eta", "C", "seed", "regret", "mean_perturb_norm", "bound_over_T"]
        rows = [
            [r.rule, r.T, r.eta, r.C, r.seed, r.regret, r.mean_perturb_norm, r.bound_over_T]
            for r in result.rows
        ]
        return ReportService.write_csv(path, header, rows)

    @staticmethod
    def write_flow(result, path):
        rows = [[r.h, r.steps, r.max_deviation] for r in result.rows]
        return ReportService.write_csv(path, ["h", "steps", "max_deviation"], rows)

    @staticmethod
    def plot_lines(path, x, series, xlabel, ylabel, log=False, title=None):
        """
        Line plot of several series against a shared abscissa

        Args:
            path: SVG file
            x: Abscissa values
            series: Mapping label -> ordinates
            xlabel, ylabel: Axis labels
            log: Log-log axes
            title: Optional title
        """
        _ensure_parent(path)
        fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
        for label, ys in series.items():
            ax.plot(x, ys, marker="o" if log else None, label=label)
        if log:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def plot_trajectories(path, header, rows):
        """
        Overlay the first two coordinates of the EG and follower paths

        The header is t, eg_0..eg_{d-1}, <follower>_0..<follower>_{d-1}, distance.
        """
        _ensure_parent(path)
        d = (len(header) - 2) // 2
        fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
        for start, style in ((1, "-"), (1 + d, "--")):
            xs = [row[start] for row in rows]
            ys = [row[start + 1] for row in rows] if d > 1 else [0.0] * len(rows)
            ax.plot(xs, ys, style, label=header[start].rsplit("_", 1)[0])
        ax.set_xlabel("coordinate 0")
        ax.set_ylabel("coordinate 1" if d > 1 else "")
        ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def plot_csv(csv_path, svg_path=None, x=None, columns=None, log=False):
        """
        Plot columns of a CSV against one of its columns

        Args:
            csv_path: Input CSV
            svg_path: Output SVG (default: csv_path with .svg)
            x: Abscissa column (default: the first)
            columns: Ordinate columns (default: all others)
            log: Log-log axes

        Returns:
            str: SVG path
        """
        header, data = ReportService.read_csv(csv_path)
        x = x or header[0]
        if x not in data:
            raise ConfigurationError(f"Column {x} not in {csv_path}")
        columns = columns or [name for name in header if name != x]
        missing = [name for name in columns if name not in data]
        if missing:
            raise ConfigurationError(f"Columns {missing} not in {csv_path}")
        svg_path = svg_path or os.path.splitext(csv_path)[0] + ".svg"
        series = {name: data[name] for name in columns}
        ylabel = columns[0] if len(columns) == 1 else "value"
        return ReportService.plot_lines(svg_path, data[x], series, x, ylabel, log=log)
