# -*- coding: utf-8 -*-
"""
Report Generator - Aggregate certification logs into reports/summary.md
"""
import os
import json
import glob
import tempfile
from datetime import datetime

DEFAULT_LOG_PATTERN = '*cert*.jsonl'


def write_atomic(path, text):
    """Temp file in the target directory, then rename over the target"""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix='.ebi-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def load_logs(log_pattern=DEFAULT_LOG_PATTERN):
    """Load all certify records from log files matching pattern"""
    log_files = sorted(glob.glob(log_pattern))
    all_logs = []

    for log_file in log_files:
        try:
            with open(log_file, 'r', encoding='utf-8') as f:
                for line in f:
                    if line.strip():
                        try:
                            log_entry = json.loads(line)
                        except json.JSONDecodeError:
                            continue
                        if log_entry.get('phase') != 'certify':
                            continue
                        log_entry['_source_file'] = log_file
                        all_logs.append(log_entry)
        except OSError as e:
            print(f"Warning: Could not read {log_file}: {e}")

    return all_logs


def aggregate_by_source(logs):
    """Group records by behavior source (builtin-reference, werner(v=...), counts file, ...)"""
    by_source = {}
    for log in logs:
        by_source.setdefault(log.get('source') or 'unknown', []).append(log)
    return by_source


def calculate_metrics(logs):
    """Certification rate and diagnostic extremes for a group of records"""
    if not logs:
        return {
            'decisions': 0,
            'certified_rate': 0.0,
            'mean_s_value': 0.0,
            'max_uniformity_residual': 0.0,
            'min_singular_value': 0.0,
            'max_det_residual': 0.0,
            'avg_time_ms': 0.0,
        }

    total = len(logs)
    certified = sum(1 for log in logs if log.get('verdict') == 'certified')
    diagnostics = [log.get('diagnostics', {}) for log in logs]
    s_values = [d['s_value'] for d in diagnostics if 's_value' in d]
    times = [log['elapsed_ms'] for log in logs if log.get('elapsed_ms') is not None]

    return {
        'decisions': total,
        'certified_rate': certified / total,
        'mean_s_value': sum(s_values) / len(s_values) if s_values else 0.0,
        'max_uniformity_residual': max((d.get('uniformity_residual', 0.0) for d in diagnostics), default=0.0),
        'min_singular_value': min((d.get('min_singular_value', 0.0) for d in diagnostics), default=0.0),
        'max_det_residual': max((d.get('max_det_residual', 0.0) for d in diagnostics), default=0.0),
        'avg_time_ms': sum(times) / len(times) if times else 0.0,
    }


def render_report(logs):
    """Markdown text for a list of certify records"""
    by_source = aggregate_by_source(logs)

    report_lines = []
    report_lines.append("# EBI Certification - Summary Report")
    report_lines.append("")
    report_lines.append(f"Generated: {datetime.now().isoformat()}")
    report_lines.append(f"Total certification records: {len(logs)}")
    report_lines.append("")

    report_lines.append("## Per-Source Metrics")
    report_lines.append("")
    report_lines.append("| Source | Decisions | Certified% | Mean S | Max P-unif residual | Min σ | Max det residual | Time(ms) |")
    report_lines.append("|--------|-----------|------------|--------|---------------------|-------|------------------|----------|")
    for source in sorted(by_source):
        m = calculate_metrics(by_source[source])
        report_lines.append(
            f"| {source} | {m['decisions']} | {m['certified_rate']*100:.1f} | {m['mean_s_value']:.9f} | "
            f"{m['max_uniformity_residual']:.3e} | {m['min_singular_value']:.6f} | "
            f"{m['max_det_residual']:.3e} | {m['avg_time_ms']:.2f} |"
        )
    report_lines.append("")

    # One record of each verdict
    report_lines.append("## Illustrative Decision Logs")
    report_lines.append("")
    for verdict in ("certified", "rejected"):
        log_entry = next((log for log in logs if log.get('verdict') == verdict), None)
        if log_entry is None:
            continue
        safe_log = {k: v for k, v in log_entry.items() if not k.startswith('_')}
        report_lines.append(f"### Example: {verdict.upper()}")
        report_lines.append("")
        report_lines.append("```json")
        report_lines.append(json.dumps(safe_log, indent=2))
        report_lines.append("```")
        report_lines.append("")

    return '\n'.join(report_lines)


def generate_report(log_pattern=DEFAULT_LOG_PATTERN, report_path=os.path.join('reports', 'summary.md'),
                    verbose=True):
    """Write the summary report; returns its path, or None without logs"""
    if verbose:
        print("Generating report from logs...")

    logs = load_logs(log_pattern)
    if not logs:
        if verbose:
            print("No log files found")
        return None

    directory = os.path.dirname(report_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    write_atomic(report_path, render_report(logs))

    if verbose:
        print(f"Report generated: {report_path}")
    return report_path


if __name__ == "__main__":
    generate_report()
