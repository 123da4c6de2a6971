import logging
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from datetime import datetime

from django.conf import settings

data_issue_logger = logging.getLogger("data_issues")
output_logger = logging.getLogger("output")


def _has_file_handler(logger, path):
    path = os.path.abspath(path)
    return any(getattr(h, "baseFilename", None) == path for h in logger.handlers)


def setup_loggers(job_dir):
    """Attach output.log and data_issues.log in job_dir to the two run loggers."""
    os.makedirs(job_dir, exist_ok=True)
    data_issue_logger.setLevel(logging.WARNING)
    output_logger.setLevel(logging.INFO)

    data_issue_path = os.path.join(job_dir, "data_issues.log")
    if not _has_file_handler(data_issue_logger, data_issue_path):
        data_issue_handler = logging.FileHandler(data_issue_path)
        data_issue_handler.setLevel(logging.WARNING)
        data_issue_logger.addHandler(data_issue_handler)

    output_path = os.path.join(job_dir, "output.log")
    if not _has_file_handler(output_logger, output_path):
        output_handler = logging.FileHandler(output_path)
        output_handler.setLevel(logging.INFO)
        output_logger.addHandler(output_handler)

    output_logger.info(datetime.now().strftime("%d/%m/%Y %H:%M:%S"))


def log_data_issue(s):
    data_issue_logger.warning(s)
    if settings.VERBOSE:
        print(s)


def log_output(s):
    output_logger.info(s)
    if settings.VERBOSE:
        print(s)


def report_counts(counts):
    """Log and return the pass rate of a batch of checks."""
    passed = counts.get("success", 0)
    failed = counts.get("fail", 0)
    percent_success = "N/A"
    if passed + failed > 0:
        percent_success = f"{100 * passed / (passed + failed):.1f}"
    line = (
        f"{percent_success}% success. Count: {passed}, Total fail: {failed}. "
        f"Total skipped: {counts.get('skipped', 0)}"
    )
    log_output(line)
    return line


def chunks(l, n):
    """Yield successive n-sized chunks from list l."""
    for i in range(0, len(l), n):
        yield l[i : i + n]


@contextmanager
def worker_map(threads=None):
    """
    A map over sample points: the builtin for one worker, otherwise a thread
    pool of HERMITIA_THREADS workers. Results keep the input order.
    """
    threads = settings.HERMITIA_THREADS if threads is None else threads
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:

        def mapper(fn, items):
            items = list(items)
            size = max(1, -(-len(items) // threads))
            results = pool.map(lambda chunk: [fn(x) for x in chunk], chunks(items, size))
            return [r for chunk in results for r in chunk]

        yield mapper
