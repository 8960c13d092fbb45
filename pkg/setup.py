# encoding: utf8

from setuptools import setup, find_packages


with open('easr/VERSION', 'rb') as f:
    version = f.read().decode('utf-8').strip()


setup(
    name='embedded-asr',
    version=version,
    packages=find_packages(),
    include_package_data=True,
    package_data={'easr': ['VERSION']},
    install_requires=['click>=7.0', 'numpy>=1.20', 'scipy>=1.7', 'joblib'],
    entry_points='''
        [console_scripts]
        embedded-asr=easr.ui:main
    ''',
    test_suite='easr.tests',
    description='Eye blink artifact removal for single channel EEG with '
                'embedded artifact subspace reconstruction.',
    classifiers=[
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
    ],
)
