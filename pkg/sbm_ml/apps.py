from django.apps import AppConfig


class SbmMlConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sbm_ml'
    verbose_name = 'beta-SBM maximum likelihood degree'
