from relchain.netsim.clock import REALTIME, VIRTUAL, Scheduler
from relchain.netsim.faults import FaultSchedule
from relchain.netsim.latency import LinkDelay, link_delays
from relchain.netsim.network import Bus, NetworkHandle, SimReport, spawn_network
