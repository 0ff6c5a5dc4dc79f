from uuid import uuid4

from django.test import TestCase

from sbm_ml.models import Operation
from sbm_ml.services import JobService


class TestJobService(TestCase):
    def setUp(self) -> None:
        self.service = JobService(max_workers=1)

    def tearDown(self) -> None:
        self.service.shutdown()

    def test_get_operation_success(self):
        op_id = uuid4()
        op = Operation(op_id)

        self.service.operations[op_id] = op
        self.assertEqual(self.service.get_operation(op_id), op)

    def test_get_operation_not_found(self):
        self.assertEqual(self.service.get_operation(uuid4()), None)

    def test_finish_operation_success(self):
        op_id = uuid4()
        self.service.operations[op_id] = Operation(op_id)

        self.assertEqual(self.service.finish_operation(op_id, 42), True)
        self.assertEqual(self.service.operations[op_id].result, 42)
        self.assertTrue(self.service.operations[op_id].done)

    def test_finish_operation_not_found(self):
        self.assertEqual(self.service.finish_operation(uuid4(), True), False)

    def test_execute_operation_inline(self):
        op_id = self.service.execute_operation(lambda x: x + 1, args=(0,))

        self.assertEqual(self.service.wait([op_id]), [1])

    def test_map_keeps_submission_order(self):
        with JobService(max_workers=4) as jobs:
            self.assertEqual(jobs.map(lambda x: x * x, range(20)), [x * x for x in range(20)])

    def test_wait_reraises_job_error(self):
        def boom(x):
            raise ZeroDivisionError(x)

        with JobService(max_workers=2) as jobs:
            with self.assertRaises(ZeroDivisionError):
                jobs.map(boom, [1, 2])
