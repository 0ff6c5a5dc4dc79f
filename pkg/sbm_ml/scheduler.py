from apscheduler.executors.pool import ThreadPoolExecutor
from apscheduler.schedulers.background import BackgroundScheduler
from apscheduler.triggers.date import DateTrigger

__all__ = ['DateTrigger', 'make_scheduler']


def make_scheduler(max_workers: int) -> BackgroundScheduler:
    # queued jobs must never be dropped as misfires, however long the pool is busy
    scheduler = BackgroundScheduler(
        executors={'default': ThreadPoolExecutor(max_workers)},
        job_defaults={'misfire_grace_time': None, 'coalesce': False},
    )
    scheduler.start()
    return scheduler
