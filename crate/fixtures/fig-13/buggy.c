int main()
{
const double E=0.000001;
double a,b,inter,subarea=0;
int n,key=0;
scanf("%lf %lf %d",&a,&b,&n);
inter=(b - a)/n;
while(key<n&&diff*key+1< E)
{
    subarea+=1;
    key++;
}
return 0;
}
