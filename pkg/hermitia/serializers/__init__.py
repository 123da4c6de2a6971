# Import serializers from folder
from .fields import ComplexField, ComplexArrayField, RealArrayField
from .curvature_serializer import CurvatureReportSerializer, PointCurvatureSerializer, TensorSerializer
from .structure_serializer import CheckReportSerializer, ChecklistEntrySerializer, StructureSerializer
from .suite_serializer import SuiteReportSerializer, SuiteRowSerializer
from .flow_serializer import FinalStateSerializer, FlowDiagnosticSerializer, FlowReportSerializer, HopfSelfSimilarSerializer
