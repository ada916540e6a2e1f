# Generated by Django 4.2.7 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('experiment', models.CharField(max_length=32)),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('threads', models.PositiveIntegerField(default=1)),
                ('status', models.CharField(choices=[('OK', 'Passed'), ('FAIL', 'Verdict failed'), ('ERROR', 'Error')], default='OK', max_length=10)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('summary', models.JSONField(blank=True, default=dict)),
                ('message', models.TextField(blank=True)),
                ('duration_seconds', models.FloatField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'db_table': 'experiment_runs',
                'ordering': ['-created_at'],
            },
        ),
    ]
