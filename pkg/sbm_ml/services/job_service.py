import logging
from datetime import datetime, timezone
from typing import Callable, Iterable, Sequence
from uuid import UUID, uuid4

from django.conf import settings

from ..models import Operation
from ..scheduler import DateTrigger, make_scheduler

logger = logging.getLogger(__name__)


class JobService:
    """
    Runs independent callables on a background thread pool and hands the
    results back in submission order. One worker means inline execution.
    """

    def __init__(self, max_workers: int | None = None):
        self.max_workers = max(1, max_workers or settings.MLDEG['THREADS'])
        self.operations: dict[UUID, Operation] = {}
        self._scheduler = None

    def __enter__(self) -> "JobService":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    def execute_operation(
        self,
        func: Callable,
        args: list | tuple = (),
    ) -> UUID:
        op_id = uuid4()
        self.operations[op_id] = Operation(op_id)

        def __exec_func() -> None:
            try:
                res = func(*args)
            except Exception as exc:  # re-raised in the waiting thread
                self.fail_operation(op_id, exc)
            else:
                self.finish_operation(op_id, res)

        if self.max_workers == 1:
            __exec_func()
            return op_id

        if self._scheduler is None:
            self._scheduler = make_scheduler(self.max_workers)
        self._scheduler.add_job(
            __exec_func,
            trigger=DateTrigger(datetime.now(timezone.utc)),
        )
        return op_id

    def finish_operation(self, op_id: UUID, result) -> bool:
        op: Operation = self.operations.get(op_id)
        if op is None:
            return False
        op.result = result
        op.done = True
        op.finished.set()
        return True

    def fail_operation(self, op_id: UUID, error: BaseException) -> bool:
        op: Operation = self.operations.get(op_id)
        if op is None:
            return False
        op.error = error
        op.done = True
        op.finished.set()
        return True

    def get_operation(self, op_id: UUID) -> Operation | None:
        return self.operations.get(op_id)

    def wait(self, op_ids: Sequence[UUID]) -> list:
        """
        Block until every operation is done
        :return: Results in the order of op_ids; the first recorded error is raised
        """
        results = []
        for op_id in op_ids:
            op = self.operations[op_id]
            op.finished.wait()
            if op.error is not None:
                raise op.error
            results.append(op.result)
        return results

    def map(self, func: Callable, items: Iterable) -> list:
        op_ids = [self.execute_operation(func, args=(item,)) for item in items]
        return self.wait(op_ids)

    def shutdown(self) -> None:
        if self._scheduler is not None:
            self._scheduler.shutdown(wait=True)
            self._scheduler = None
