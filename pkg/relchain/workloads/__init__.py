from relchain.config import validated
from relchain.errors import ConfigError
from relchain.workloads.base import Workload
from relchain.workloads.batching import SWEEP_BATCH_SIZES, batch, unbatch
from relchain.workloads.smallbank import Smallbank, SmallbankConfig, smallbank_init, smallbank_next
from relchain.workloads.tpcc import Tpcc, TpccConfig, tpcc_init, tpcc_next, tpcc_procedures

WORKLOADS = {
    Smallbank.name: (Smallbank, SmallbankConfig),
    Tpcc.name: (Tpcc, TpccConfig),
}


def get_workload(name, **params):
    """Workload instance by name; params are validated against its config model."""
    if name not in WORKLOADS:
        raise ConfigError(f"unknown workload {name!r}, expected one of {sorted(WORKLOADS)}")
    workload_cls, config_cls = WORKLOADS[name]
    return workload_cls(validated(config_cls, **params))
