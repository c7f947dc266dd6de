"""Mutable placement state shared by both policies."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .model import AppId, DeviceId, InstanceId, ServiceId

INITIAL = "initial"
EVICTED = "evicted"
SHIFTED = "shifted"
TRIGGERS = (INITIAL, EVICTED, SHIFTED)

MIGRATION_COLUMNS = ("instance", "app", "service", "from_device", "to_device", "trigger")


@dataclass(frozen=True)
class Migration:
    instance: InstanceId
    app: AppId
    service: ServiceId
    source: Optional[DeviceId]
    target: DeviceId
    trigger: str


@dataclass
class PlacementState:
    """Instances mapped to devices plus the log of how they got there.

    At most one instance of a service lives on a given device.
    """

    allocations: dict[InstanceId, DeviceId] = field(default_factory=dict)
    instance_service: dict[InstanceId, tuple[AppId, ServiceId]] = field(default_factory=dict)
    migration_log: list[Migration] = field(default_factory=list)
    next_instance: int = 0
    # bookkeeping for the termination bound, not part of the placement itself
    sars_issued: int = field(default=0, compare=False)
    sars_processed: int = field(default=0, compare=False)
    _index: dict[DeviceId, dict[ServiceId, InstanceId]] = field(
        default_factory=dict, repr=False, compare=False)

    def hosts(self, device: DeviceId, service: ServiceId) -> bool:
        return service in self._index.get(device, {})

    def instance_at(self, device: DeviceId, service: ServiceId) -> Optional[InstanceId]:
        return self._index.get(device, {}).get(service)

    def services_on(self, device: DeviceId) -> list[ServiceId]:
        return sorted(self._index.get(device, {}))

    def devices_of(self, service: ServiceId) -> list[DeviceId]:
        return sorted(d for d, svc in self._index.items() if service in svc)

    def used_devices(self) -> list[DeviceId]:
        return sorted(d for d, svc in self._index.items() if svc)

    def allocate(self, app: AppId, service: ServiceId, device: DeviceId,
                 instance: Optional[InstanceId] = None) -> InstanceId:
        if self.hosts(device, service):
            raise ValueError(f"service {service} already allocated on device {device}")
        if instance is None:
            instance = self.next_instance
            self.next_instance += 1
        elif instance in self.allocations:
            raise ValueError(f"instance {instance} is already allocated")
        self.allocations[instance] = device
        self.instance_service[instance] = (app, service)
        self._index.setdefault(device, {})[service] = instance
        return instance

    def deallocate(self, instance: InstanceId) -> tuple[AppId, ServiceId, DeviceId]:
        device = self.allocations.pop(instance)
        app, service = self.instance_service.pop(instance)
        del self._index[device][service]
        return app, service, device

    def log(self, instance, app, service, source, target, trigger) -> None:
        self.migration_log.append(Migration(instance, app, service, source, target, trigger))

    def copy(self) -> "PlacementState":
        return PlacementState(
            dict(self.allocations), dict(self.instance_service), list(self.migration_log),
            self.next_instance, self.sars_issued, self.sars_processed,
            {d: dict(svc) for d, svc in self._index.items()})


def migration_log_csv(state: PlacementState) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MIGRATION_COLUMNS)
    for m in state.migration_log:
        writer.writerow([m.instance, m.app, m.service,
                         "" if m.source is None else m.source, m.target, m.trigger])
    return buf.getvalue()
