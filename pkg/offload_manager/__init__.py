"""
Paquete que agrupa el planificador de descarga de tareas para redes vehiculares.

Contiene el modelo del problema, el algoritmo SARound con su núcleo de
programación lineal, los algoritmos de comparación, el oráculo exacto y el
simulador de eventos discretos que reproduce el protocolo de suscripción de
servicios y control de descarga.
"""

__version__ = "0.1.0"
