from relchain.bench.drivers import run_async, run_queries, run_sync

drivers = {
    "sync": run_sync,
    "pseudo-sync": run_sync,
    "async": run_async,
}


def get_driver(config):
    return run_queries if config.queries else drivers[config.mode]
