from pathlib import Path

from auxcell import SearchReport, full_train, get_settings, merge_settings, prepare_task, run_search
from auxcell.genome import decode

CURRENT_DIR = Path(__file__).parent


def main():
    workdir = CURRENT_DIR / "auxcell-work"
    settings = merge_settings(get_settings(), {"search": {"total_architectures": 24, "workers": 2}})

    # Dataset, encoder stub, teacher and feature caches are reused on the next run
    artifacts = prepare_task(settings, workdir)

    logs, results = [], {}
    for mode in ("rl", "random"):
        run_settings = merge_settings(settings, {"search": {"mode": mode}})
        log_path = workdir / f"search-{mode}-s0.jsonl"
        results[mode] = run_search(run_settings, artifacts, log_path)
        logs.append(log_path)

    report = SearchReport(logs, window=8)
    report.print_report()

    best, reward = results["rl"].top_k[0]
    print(f"Best rl genome {best} with final reward {reward:.4f}")

    trained = full_train(decode(best), artifacts, settings)
    print(f"Holdout reward {trained.metrics.reward:.4f}, without aux nodes {trained.stripped_metrics.reward:.4f}")


if __name__ == "__main__":
    from auxcell.utilities import setup_logging
    setup_logging(level="info")

    main()
