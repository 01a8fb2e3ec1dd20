from django.apps import AppConfig


class TopicGrowthConfig(AppConfig):
    name = "topic_growth"
    verbose_name = "Topic growth and citation impact"
