from django.apps import AppConfig


class SudwatchConfig(AppConfig):
    name = 'sudwatch'
    verbose_name = 'Substance use discussion watch'
